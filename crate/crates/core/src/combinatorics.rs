//! Counting and enumeration over the outcome spaces of top-k orders.

use crate::error::{Error, Result};
use crate::order::PartialOrder;

pub const DEFAULT_ENUMERATION_CAP: usize = 6;

/// Number of total orders completing any order of length `k`: (m−k)!.
pub fn extension_count(k: usize, m: usize) -> Result<u128> {
    if k > m {
        return Err(Error::LengthOutOfRange { k, m });
    }
    (1..=(m - k) as u128).try_fold(1u128, |acc, i| {
        acc.checked_mul(i).ok_or(Error::Overflow("extension count"))
    })
}

/// |Ω(A)| = Σ_{i=1..m} m!/(m−i)!.
pub fn partial_order_count(m: usize) -> Result<u128> {
    let mut total = 0u128;
    let mut falling = 1u128;
    for i in 0..m {
        falling = falling
            .checked_mul((m - i) as u128)
            .ok_or(Error::Overflow("partial order count"))?;
        total = total
            .checked_add(falling)
            .ok_or(Error::Overflow("partial order count"))?;
    }
    Ok(total)
}

/// All top-k orders over `m` items for k = 1..=m, shortest first.
pub fn enumerate_partial_orders(m: usize) -> Result<Vec<PartialOrder>> {
    enumerate_partial_orders_capped(m, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_partial_orders_capped(m: usize, cap: usize) -> Result<Vec<PartialOrder>> {
    if m > cap {
        return Err(Error::EnumerationCap { m, cap });
    }
    let mut out = Vec::new();
    for k in 1..=m {
        prefixes(m, k, &mut Vec::new(), &mut vec![false; m], &mut out);
    }
    Ok(out)
}

/// All orders of exactly length `k` over `m` items.
pub fn enumerate_orders_of_length(m: usize, k: usize) -> Vec<PartialOrder> {
    let mut out = Vec::new();
    if k <= m {
        prefixes(m, k, &mut Vec::new(), &mut vec![false; m], &mut out);
    }
    out
}

/// L(A): every total order of `m` items.
pub fn enumerate_total_orders(m: usize) -> Vec<PartialOrder> {
    enumerate_orders_of_length(m, m)
}

fn prefixes(
    m: usize,
    k: usize,
    current: &mut Vec<usize>,
    used: &mut [bool],
    out: &mut Vec<PartialOrder>,
) {
    if current.len() == k {
        out.push(PartialOrder::new(current.clone()));
        return;
    }
    for j in 0..m {
        if !used[j] {
            used[j] = true;
            current.push(j + 1);
            prefixes(m, k, current, used, out);
            current.pop();
            used[j] = false;
        }
    }
}
