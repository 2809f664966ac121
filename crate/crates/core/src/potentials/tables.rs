use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

/// `c_kd = sum_{h=1}^{min(k,d)} C(k,h)`.
pub fn c_kd(k: u32, d: u32) -> BigUint {
    let mut sum = BigUint::zero();
    let mut binom = BigUint::one();
    for h in 1..=k.min(d) {
        binom = binom * BigUint::from(k - h + 1) / BigUint::from(h);
        sum += &binom;
    }
    sum
}

/// `c_kd` via `c_kd = k + sum_{i<k} c_{i,d-1}` with `c_{k,0} = 0`.
pub fn c_kd_recurrence(k: u32, d: u32) -> BigUint {
    // row[i] = c_{i, level}
    let mut row = vec![BigUint::zero(); k as usize + 1];
    for _ in 0..d {
        let mut next = Vec::with_capacity(row.len());
        let mut prefix = BigUint::zero();
        for (i, c) in row.iter().enumerate() {
            next.push(BigUint::from(i) + &prefix);
            prefix += c;
        }
        row = next;
    }
    row.pop().unwrap()
}

pub fn c_kd_i64(k: u32, d: u32) -> Option<i64> {
    c_kd(k, d).to_i64()
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("bands need k >= 2, got {0}")]
    SmallK(u32),
    #[error("bands need d >= 1")]
    ZeroDepth,
    #[error("band property ({0}) fails for k={1}, d={2}")]
    Property(char, u32, u32),
    #[error("band value does not fit in i64")]
    Overflow,
}

/// Slope bands `[m_i, M_i]` for the weighted-tree dual, `i = 1..=d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BandTable {
    pub k: u32,
    pub d: u32,
    #[serde(serialize_with = "ser_big")]
    pub m: Vec<BigInt>,
    #[serde(serialize_with = "ser_big")]
    pub big_m: Vec<BigInt>,
    m64: Vec<i64>,
    big_m64: Vec<i64>,
}

fn ser_big<S: serde::Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

impl BandTable {
    /// `c = M_d`.
    pub fn c(&self) -> &BigInt {
        self.big_m.last().unwrap()
    }

    /// `m_i` for depth `i` in `1..=d`, clamped to 1 for the root.
    pub fn lo(&self, i: usize) -> i64 {
        self.m64[i.max(1) - 1]
    }

    pub fn hi(&self, i: usize) -> i64 {
        self.big_m64[i.max(1) - 1]
    }

    pub fn c_i64(&self) -> i64 {
        *self.big_m64.last().unwrap()
    }
}

/// Closed form of `M_d`.
pub fn band_ratio(k: u32, d: u32) -> BigInt {
    if k == 2 {
        BigInt::from(4 * d as i64 - 1)
    } else {
        let kk = BigInt::from(k);
        let p = BigInt::from(k - 1).pow(d);
        (BigInt::from(2) * &kk * p - 3 * &kk + 2) / (kk - 2)
    }
}

pub fn bands(k: u32, d: u32) -> Result<BandTable, TableError> {
    if k < 2 {
        return Err(TableError::SmallK(k));
    }
    if d == 0 {
        return Err(TableError::ZeroDepth);
    }
    let mut m = Vec::with_capacity(d as usize);
    let mut big_m = Vec::with_capacity(d as usize);
    for i in 1..=d {
        if k == 2 {
            m.push(BigInt::from(-2 * (d as i64 - i as i64) - 1));
            big_m.push(BigInt::from(2 * (d as i64 + i as i64) - 1));
        } else {
            let kk = BigInt::from(k);
            let den = BigInt::from(k - 2);
            let q = BigInt::from(k - 1);
            let lo = -BigInt::from(2) * q.pow(d - i + 1) + &kk;
            let hi = BigInt::from(2) * &kk * q.pow(d) - BigInt::from(2) * q.pow(d - i + 1) - &kk;
            let (lo_q, lo_r) = lo.div_rem(&den);
            let (hi_q, hi_r) = hi.div_rem(&den);
            assert!(lo_r.is_zero() && hi_r.is_zero(), "band values are integral");
            m.push(lo_q);
            big_m.push(hi_q);
        }
    }
    check_properties(k, &m, &big_m)?;
    let m64 = m.iter().map(|x| x.to_i64()).collect::<Option<Vec<_>>>();
    let big_m64 = big_m.iter().map(|x| x.to_i64()).collect::<Option<Vec<_>>>();
    let (m64, big_m64) = match (m64, big_m64) {
        (Some(a), Some(b)) => (a, b),
        // table still usable for exact identities
        _ => (vec![i64::MIN; d as usize], vec![i64::MAX; d as usize]),
    };
    Ok(BandTable { k, d, m, big_m, m64, big_m64 })
}

fn check_properties(k: u32, m: &[BigInt], big_m: &[BigInt]) -> Result<(), TableError> {
    let d = m.len();
    let fail = |c| Err(TableError::Property(c, k, d as u32));
    // (a)
    let chain_ok = m.windows(2).all(|w| w[0] < w[1])
        && m[d - 1] == BigInt::from(-1)
        && m[d - 1] < big_m[0]
        && big_m.windows(2).all(|w| w[0] < w[1]);
    if !chain_ok {
        return fail('a');
    }
    // (b)
    let gap = &big_m[0] - &m[0];
    if (0..d).any(|i| &big_m[i] - &m[i] != gap) {
        return fail('b');
    }
    for j in 1..=k as i64 {
        // (c)
        if &big_m[0] + (j - 1) * &m[0] < BigInt::from(j) {
            return fail('c');
        }
        // (d)
        for i in 0..d.saturating_sub(1) {
            if (j - 1) * &m[i + 1] - &m[i] < BigInt::from(j) {
                return fail('d');
            }
        }
    }
    if *big_m.last().unwrap() != band_ratio(k, d as u32) {
        return fail('c');
    }
    Ok(())
}
