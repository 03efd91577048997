//! JSON shapes shared by the artifacts: rationals as `{"num","den"}`,
//! complex numbers as `[re, im]`, twists as either.

use num_complex::Complex64 as C64;
use num_rational::Rational64 as Q;
use serde::{Deserialize, Serialize};

use crate::algebra::{eq, recognize_phase};

/// Largest denominator tried when recognizing a twist as a root of unity.
pub const MAX_TWIST_DEN: i64 = 240;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rat {
    pub num: i64,
    pub den: i64,
}

impl From<Q> for Rat {
    fn from(q: Q) -> Rat {
        Rat {
            num: *q.numer(),
            den: *q.denom(),
        }
    }
}

impl TryFrom<Rat> for Q {
    type Error = crate::Error;
    fn try_from(r: Rat) -> crate::Result<Q> {
        if r.den == 0 {
            return Err(crate::Error::Invalid("zero denominator".into()));
        }
        Ok(Q::new(r.num, r.den))
    }
}

pub fn cjson(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn from_cjson(z: [f64; 2]) -> C64 {
    C64::new(z[0], z[1])
}

/// A unit complex number serialized as an exponent when it is a root of
/// unity of small order, as raw `[re, im]` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhaseJson {
    Exact(Rat),
    Raw([f64; 2]),
}

impl PhaseJson {
    pub fn encode(z: C64) -> PhaseJson {
        match recognize_phase(z, MAX_TWIST_DEN, 1e-9) {
            Some(q) => PhaseJson::Exact(q.into()),
            None => PhaseJson::Raw(cjson(z)),
        }
    }

    pub fn decode(self) -> crate::Result<C64> {
        Ok(match self {
            PhaseJson::Exact(r) => eq(Q::try_from(r)?),
            PhaseJson::Raw(z) => from_cjson(z),
        })
    }
}

/// `e(p/q)` text form, or a numeric fallback.
pub fn phase_text(z: C64) -> String {
    match recognize_phase(z, MAX_TWIST_DEN, 1e-9) {
        Some(q) if *q.numer() == 0 => "1".to_string(),
        Some(q) => format!("e({}/{})", q.numer(), q.denom()),
        None => format!("{:.6}{:+.6}i", z.re, z.im),
    }
}

/// Complex number to six significant digits.
pub fn complex_text(z: C64) -> String {
    let f = |x: f64| {
        if x == 0.0 || x.abs() < 5e-13 {
            "0".to_string()
        } else {
            let mag = x.abs().log10().floor() as i32;
            let prec = (5 - mag).max(0) as usize;
            format!("{:.*}", prec, x)
        }
    };
    if z.im.abs() < 5e-13 {
        f(z.re)
    } else if z.re.abs() < 5e-13 {
        format!("{}i", f(z.im))
    } else {
        let im = f(z.im);
        let sign = if im.starts_with('-') { "" } else { "+" };
        format!("{}{}{}i", f(z.re), sign, im)
    }
}
