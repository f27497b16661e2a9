use std::sync::Arc;

use iel_core::{BitFunction, FiniteFunction, IelError, Result};
use iel_hashing::{PairwiseFamily, ToeplitzFamily};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::func::{direct_product, pad_input, reduce_entropy, reduce_output, Base, Stage};
use crate::keyed::{concat_families, random_shift, shoup_extend, Concat, KeyedFamily, ShoupExtend};
use crate::params::{calc_params, GridPoint, ParamSheet, PathKind, PipelineConfig};

const DESCRIPTOR_MAGIC: &[u8; 4] = b"UOW1";

/// A built family together with the sheet it was built from.
#[derive(Clone)]
pub struct Uowhf {
    pub sheet: ParamSheet,
    pub family: Arc<Concat>,
    pub members: Vec<Arc<ShoupExtend>>,
    /// Free-form run record (measured and asymptotic gaps, for instance).
    pub notes: Value,
}

impl Uowhf {
    pub fn with_notes(mut self, notes: Value) -> Self {
        self.notes = notes;
        self
    }

    pub fn descriptor_json(&self) -> Value {
        json!({
            "path": self.sheet.cfg.path.as_str(),
            "config": self.sheet.cfg.to_json(),
            "sheet": self.sheet.to_json(),
            "family": self.family.describe(),
            "notes": self.notes,
        })
    }

    /// `UOW1`, a path tag byte, a big-endian `u32` length and the JSON descriptor.
    pub fn descriptor_bytes(&self) -> Vec<u8> {
        let body = serde_json::to_vec(&self.descriptor_json()).expect("serializable");
        let mut out = Vec::with_capacity(body.len() + 9);
        out.extend_from_slice(DESCRIPTOR_MAGIC);
        out.push(self.sheet.cfg.path.tag());
        out.extend_from_slice(&(body.len() as u32).to_be_bytes());
        out.extend_from_slice(&body);
        out
    }
}

/// Reads a descriptor written by [`Uowhf::descriptor_bytes`].
pub fn parse_descriptor(bytes: &[u8]) -> Result<(PathKind, Value)> {
    if bytes.len() < 9 || &bytes[..4] != DESCRIPTOR_MAGIC {
        return Err(IelError::Parse("not a UOW1 descriptor".into()));
    }
    let path = match bytes[4] {
        1 => PathKind::AvgMax,
        2 => PathKind::Shannon,
        t => return Err(IelError::Parse(format!("unknown path tag {t}"))),
    };
    let len = u32::from_be_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let body = bytes.get(9..9 + len).ok_or_else(|| IelError::Parse("truncated descriptor".into()))?;
    let v: Value = serde_json::from_slice(body).map_err(|e| IelError::Parse(e.to_string()))?;
    Ok((path, v))
}

fn small(v: &BigUint, what: &str) -> Result<usize> {
    v.to_usize()
        .filter(|&v| v <= crate::func::MAX_PIPELINE_BITS)
        .ok_or_else(|| IelError::Capacity(format!("{what} = {v} is beyond the buildable range")))
}

fn toeplitz(in_len: usize, out_len: usize) -> Arc<dyn PairwiseFamily> {
    Arc::new(ToeplitzFamily::new(in_len, out_len))
}

fn check_stage(built: &dyn BitFunction, want: &crate::params::Stage) -> Result<()> {
    if BigUint::from(built.input_len()) != want.in_len || BigUint::from(built.output_len()) != want.out_len {
        return Err(IelError::Contract(format!(
            "stage {} built as {} -> {}, calculator says {} -> {}",
            want.name,
            built.input_len(),
            built.output_len(),
            want.in_len,
            want.out_len
        )));
    }
    Ok(())
}

fn member(
    product: &Arc<dyn Stage>,
    point: &GridPoint,
    sheet: &ParamSheet,
) -> Result<Arc<ShoupExtend>> {
    let log_n = sheet.log_n as usize;
    let want = &point.stages;
    let mut f: Arc<dyn Stage> = product.clone();
    check_stage(f.as_ref(), &want[0])?;
    let ell = small(&point.ell, "ell")?;
    f = Arc::new(reduce_entropy(f.clone(), toeplitz(f.input_len(), ell))?);
    check_stage(f.as_ref(), &want[1])?;
    let mut next = 2;
    if sheet.cfg.path == PathKind::Shannon {
        let tp = small(point.t_prime.as_ref().unwrap(), "t'")?;
        f = Arc::new(direct_product(f, tp)?);
        check_stage(f.as_ref(), &want[2])?;
        let ell2 = small(point.ell2.as_ref().unwrap(), "ell2")?;
        f = Arc::new(reduce_entropy(f.clone(), toeplitz(f.input_len(), ell2))?);
        check_stage(f.as_ref(), &want[3])?;
        next = 4;
    }
    let out = f.input_len() - log_n;
    f = Arc::new(reduce_output(f.clone(), toeplitz(f.output_len(), out))?);
    check_stage(f.as_ref(), &want[next])?;
    let padded: Arc<dyn Stage> = Arc::new(pad_input(f, small(&sheet.padded_in, "N")?)?);
    let shifted: Arc<dyn KeyedFamily> = Arc::new(random_shift(padded));
    Ok(Arc::new(shoup_extend(shifted, small(&sheet.shoup_blocks, "blocks")?)?))
}

fn build(f: &FiniteFunction, cfg: &PipelineConfig, path: PathKind) -> Result<Uowhf> {
    if cfg.path != path {
        return Err(IelError::Config(format!("configuration is for the {} path", cfg.path)));
    }
    if f.input_len() as u64 != cfg.n0 || f.output_len() as u64 != cfg.m0 {
        return Err(IelError::Config(format!(
            "function is {} -> {} bits, configuration says {} -> {}",
            f.input_len(),
            f.output_len(),
            cfg.n0,
            cfg.m0
        )));
    }
    let sheet = calc_params(cfg)?;
    let grid = sheet.grid.clone().ok_or_else(|| IelError::Capacity(format!("grid of {} members", sheet.kappa)))?;
    let base: Arc<dyn Stage> = Arc::new(Base(f.clone()));
    let product: Arc<dyn Stage> = Arc::new(direct_product(base, small(&sheet.t, "t")?)?);
    // members in ascending k
    let members = grid.par_iter().map(|p| member(&product, p, &sheet)).collect::<Result<Vec<_>>>()?;
    let family = Arc::new(concat_families(members.iter().map(|m| m.clone() as Arc<dyn KeyedFamily>).collect())?);
    for (got, want, what) in [
        (family.key_len(), &sheet.key_len, "key"),
        (family.in_len(), &sheet.in_len, "input"),
        (family.out_len(), &sheet.out_len, "output"),
    ] {
        if BigUint::from(got) != *want {
            return Err(IelError::Contract(format!("{what} length {got} differs from the calculator's {want}")));
        }
    }
    Ok(Uowhf { sheet, family, members, notes: Value::Null })
}

/// Gap amplification, entropy reduction, output reduction, random shift and
/// domain extension for every advice `k` on the `Delta/2` grid, concatenated.
pub fn build_uowhf_avgmax(f: &FiniteFunction, cfg: &PipelineConfig) -> Result<Uowhf> {
    build(f, cfg, PathKind::AvgMax)
}

/// As [`build_uowhf_avgmax`] with a second amplification and entropy
/// reduction per advice, on the `Delta^2 / 128 n0` grid.
pub fn build_uowhf_shannon(f: &FiniteFunction, cfg: &PipelineConfig) -> Result<Uowhf> {
    build(f, cfg, PathKind::Shannon)
}
