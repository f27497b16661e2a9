use iel_core::{IelError, Result};

/// Supported binary field widths.
pub const WIDTHS: [u32; 5] = [8, 16, 32, 64, 128];

/// GF(2^w) with a fixed reduction polynomial; elements live in the low `w` bits of a u128.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gf2w {
    w: u32,
    /// Reduction polynomial without its leading `x^w` term.
    low: u128,
}

impl Gf2w {
    /// Fixed polynomials:
    /// w=8   x^8+x^4+x^3+x+1,
    /// w=16  x^16+x^5+x^3+x+1,
    /// w=32  x^32+x^7+x^3+x^2+1,
    /// w=64  x^64+x^4+x^3+x+1,
    /// w=128 x^128+x^7+x^2+x+1.
    pub fn new(w: u32) -> Result<Self> {
        let low = match w {
            8 => 0x1B,
            16 => 0x2B,
            32 => 0x8D,
            64 => 0x1B,
            128 => 0x87,
            _ => return Err(IelError::Config(format!("unsupported field width {w}"))),
        };
        Ok(Gf2w { w, low })
    }

    /// Smallest supported width holding `bits` bits.
    pub fn for_bits(bits: usize) -> Result<Self> {
        let w = WIDTHS
            .iter()
            .copied()
            .find(|&w| w as usize >= bits)
            .ok_or_else(|| IelError::Capacity(format!("{bits} bits exceed the widest field")))?;
        Self::new(w)
    }

    pub fn width(&self) -> u32 {
        self.w
    }

    pub fn reduction_low(&self) -> u128 {
        self.low
    }

    pub fn mask(&self) -> u128 {
        if self.w == 128 {
            u128::MAX
        } else {
            (1u128 << self.w) - 1
        }
    }

    #[inline]
    fn xtime(&self, a: u128) -> u128 {
        let carry = (a >> (self.w - 1)) & 1;
        let shifted = (a << 1) & self.mask();
        if carry == 1 {
            shifted ^ self.low
        } else {
            shifted
        }
    }

    #[inline]
    pub fn mul(&self, mut a: u128, mut b: u128) -> u128 {
        let mut acc = 0u128;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a = self.xtime(a);
        }
        acc
    }

    pub fn square(&self, a: u128) -> u128 {
        self.mul(a, a)
    }

    pub fn pow(&self, a: u128, mut e: u128) -> u128 {
        let mut base = a;
        let mut acc = 1u128;
        while e != 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, `a^(2^w - 2)`.
    pub fn inv(&self, a: u128) -> Result<u128> {
        if a == 0 {
            return Err(IelError::Domain("inverse of zero".into()));
        }
        Ok(self.pow(a, self.mask() - 1))
    }

    /// Horner evaluation; `coeffs[0]` is the leading coefficient.
    #[inline]
    pub fn horner(&self, coeffs: &[u128], x: u128) -> u128 {
        coeffs.iter().fold(0u128, |acc, &c| self.mul(acc, x) ^ c)
    }

    /// Coefficients (leading first, length `points.len()`) of the unique
    /// polynomial of degree `< points.len()` through the given pairs.
    pub fn interpolate(&self, points: &[(u128, u128)]) -> Result<Vec<u128>> {
        let k = points.len();
        // Low-order-first accumulation, reversed at the end.
        let mut out = vec![0u128; k];
        for (j, &(xj, yj)) in points.iter().enumerate() {
            let mut basis = vec![1u128];
            let mut denom = 1u128;
            for (m, &(xm, _)) in points.iter().enumerate() {
                if m == j {
                    continue;
                }
                if xm == xj {
                    return Err(IelError::Infeasible("interpolation points must be distinct".into()));
                }
                // basis *= (X + xm)
                let mut next = vec![0u128; basis.len() + 1];
                for (d, &c) in basis.iter().enumerate() {
                    next[d + 1] ^= c;
                    next[d] ^= self.mul(c, xm);
                }
                basis = next;
                denom = self.mul(denom, xj ^ xm);
            }
            let scale = self.mul(yj, self.inv(denom)?);
            for (d, &c) in basis.iter().enumerate() {
                out[d] ^= self.mul(c, scale);
            }
        }
        out.reverse();
        Ok(out)
    }
}
