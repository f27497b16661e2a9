use iel_constructions::{HashTruncConstruction, TruncConstruction};
use iel_core::{BitString, DomainFunction, FiniteFunction, IelError, PreimageIndex, Result, Rng};
use num_bigint::BigUint;

/// A function under attack, seen through encoded domain elements.
pub trait Target: Send + Sync {
    fn label(&self) -> String;
    fn image(&self, z: &BitString) -> Result<BitString>;
    /// `F^-1(F(z))`, sorted.
    fn siblings(&self, z: &BitString) -> Result<Vec<BitString>>;
    fn sample_input(&self, rng: &mut Rng) -> BitString;
    fn domain_size(&self) -> BigUint;
    /// Every domain element, when the domain is small enough to list.
    fn enumerate(&self) -> Option<Vec<BitString>>;
}

/// Any enumerable [`DomainFunction`] with its preimage classes precomputed.
pub struct IndexedTarget<D: DomainFunction> {
    f: D,
    index: PreimageIndex,
}

impl<D: DomainFunction> IndexedTarget<D> {
    pub fn new(f: D) -> Result<Self> {
        let index = PreimageIndex::build(&f)?;
        Ok(IndexedTarget { f, index })
    }

    pub fn function(&self) -> &D {
        &self.f
    }

    pub fn index(&self) -> &PreimageIndex {
        &self.index
    }

    fn idx(&self, z: &BitString) -> Result<u64> {
        self.f
            .index_of(z)
            .ok_or_else(|| IelError::Domain(format!("{z} is not in the domain of {}", self.f.label())))
    }
}

impl<D: DomainFunction> Target for IndexedTarget<D> {
    fn label(&self) -> String {
        self.f.label()
    }

    fn image(&self, z: &BitString) -> Result<BitString> {
        self.idx(z)?;
        Ok(self.f.image(z))
    }

    fn siblings(&self, z: &BitString) -> Result<Vec<BitString>> {
        let idx = self.idx(z)?;
        let mut out: Vec<BitString> = self.index.siblings(idx).iter().map(|&s| self.f.element(s)).collect();
        out.sort();
        Ok(out)
    }

    fn sample_input(&self, rng: &mut Rng) -> BitString {
        self.f.element(rng.below(self.f.domain_size()))
    }

    fn domain_size(&self) -> BigUint {
        BigUint::from(self.f.domain_size())
    }

    fn enumerate(&self) -> Option<Vec<BitString>> {
        Some((0..self.f.domain_size()).map(|i| self.f.element(i)).collect())
    }
}

/// `F(x, i) = f(x)_{1..i-1}` as a target.
pub fn trunc_target(f: FiniteFunction) -> Result<IndexedTarget<TruncConstruction>> {
    IndexedTarget::new(TruncConstruction::new(f)?)
}

/// Plain `f` as a target.
pub fn function_target(f: FiniteFunction) -> Result<IndexedTarget<FiniteFunction>> {
    IndexedTarget::new(f)
}

/// The hashed construction as a target; siblings are found by sweeping `x'`.
pub struct HashTruncTarget {
    c: HashTruncConstruction,
}

impl HashTruncTarget {
    pub fn new(c: HashTruncConstruction) -> Self {
        HashTruncTarget { c }
    }

    pub fn construction(&self) -> &HashTruncConstruction {
        &self.c
    }
}

impl Target for HashTruncTarget {
    fn label(&self) -> String {
        format!("hashtrunc({})", self.c.f().label())
    }

    fn image(&self, z: &BitString) -> Result<BitString> {
        self.c.image(z)
    }

    fn siblings(&self, z: &BitString) -> Result<Vec<BitString>> {
        let (x, g, i) = self.c.decode(z)?;
        let mut out: Vec<BitString> = self.c.siblings(&x, &g, i)?.iter().map(|xp| self.c.encode(xp, &g, i)).collect();
        out.sort();
        Ok(out)
    }

    fn sample_input(&self, rng: &mut Rng) -> BitString {
        let (x, g, i) = self.c.sample_domain(rng);
        self.c.encode(&x, &g, i)
    }

    fn domain_size(&self) -> BigUint {
        (BigUint::from(self.c.n()) << self.c.n()) << self.c.family().description_len()
    }

    fn enumerate(&self) -> Option<Vec<BitString>> {
        None
    }
}
