//! Flat views over structured parameter blocks.
//!
//! The optimizer and the finite-difference checks work on a single
//! `Vec<f64>`; every parameter struct knows how to write itself into and
//! read itself back from that layout.

pub trait ParamBlock {
    fn n_params(&self) -> usize;

    fn write_flat(&self, out: &mut Vec<f64>);

    /// Overwrites this block from the front of `src`, returning the number
    /// of values consumed.
    fn read_flat(&mut self, src: &[f64]) -> usize;

    fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        self.write_flat(&mut out);
        out
    }

    fn zeroed(&self) -> Self
    where
        Self: Clone + Sized,
    {
        let mut z = self.clone();
        z.read_flat(&vec![0.0; self.n_params()]);
        z
    }
}

impl ParamBlock for Vec<f64> {
    fn n_params(&self) -> usize {
        self.len()
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(self);
    }

    fn read_flat(&mut self, src: &[f64]) -> usize {
        let n = self.len();
        self.copy_from_slice(&src[..n]);
        n
    }
}

impl<T: ParamBlock> ParamBlock for Option<T> {
    fn n_params(&self) -> usize {
        self.as_ref().map_or(0, T::n_params)
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        if let Some(t) = self {
            t.write_flat(out);
        }
    }

    fn read_flat(&mut self, src: &[f64]) -> usize {
        self.as_mut().map_or(0, |t| t.read_flat(src))
    }
}

pub(crate) fn write_all<T: ParamBlock>(items: &[T], out: &mut Vec<f64>) {
    for t in items {
        t.write_flat(out);
    }
}

pub(crate) fn read_all<T: ParamBlock>(items: &mut [T], src: &[f64]) -> usize {
    let mut used = 0;
    for t in items {
        used += t.read_flat(&src[used..]);
    }
    used
}

pub(crate) fn check_finite(name: &str, values: &[f64]) -> crate::Result<()> {
    match values
        .iter()
        .position(|v| v.is_nan() || *v == f64::INFINITY)
    {
        Some(i) => Err(crate::Error::NonFinite(format!("{name}[{i}]"))),
        None => Ok(()),
    }
}
