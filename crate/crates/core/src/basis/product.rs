use super::{hermite_product_table, trig_product, EigenBasis, EigenFunction, FunctionKind, Process};
use crate::error::{OismError, Result};

/// Expansion φ_k φ_l = Σ_h β_h φ_h over the extended basis, for every pair of
/// basis functions (constant included). Immutable once built.
///
/// Pairs of univariate Hermite functions in different coordinates have no
/// entry: their carré-du-champ vanishes identically and they never enter the
/// quadratic form.
#[derive(Clone, Debug)]
pub struct ProductTable {
    size: usize,
    // packed upper triangle, row k holds l = k..size
    entries: Vec<Option<Vec<(usize, f64)>>>,
}

fn packed_index(size: usize, k: usize, l: usize) -> usize {
    let (a, b) = if k <= l { (k, l) } else { (l, k) };
    a * size - a * (a + 1) / 2 + b
}

impl ProductTable {
    pub fn build(basis: &EigenBasis) -> Result<Self> {
        let size = basis.len();
        let mut entries = Vec::with_capacity(size * (size + 1) / 2);
        match basis.process() {
            Process::TruncatedBm => {
                let functions = basis.functions();
                for k in 0..size {
                    for l in k..size {
                        let terms = trig_product(&functions[k], &functions[l])?;
                        entries.push(Some(resolve(basis, terms)?));
                    }
                }
            }
            Process::Ou => {
                let functions = basis.functions();
                let max_order = functions
                    .iter()
                    .flat_map(|f| f.index.iter().copied())
                    .max()
                    .unwrap_or(0) as usize;
                let ext_order = basis
                    .extended()
                    .iter()
                    .flat_map(|f| f.index.iter().copied())
                    .max()
                    .unwrap_or(0) as usize;
                let table = hermite_product_table(max_order, ext_order)?;
                for k in 0..size {
                    for l in k..size {
                        entries.push(hermite_pair(basis, &table, k, l)?);
                    }
                }
            }
        }
        Ok(ProductTable { size, entries })
    }

    /// Number of basis functions covered (constant included).
    pub fn size(&self) -> usize {
        self.size
    }

    /// Expansion of φ_k φ_l as (extended index, β) pairs; `None` when the pair
    /// has a vanishing carré-du-champ and was not expanded.
    pub fn get(&self, k: usize, l: usize) -> Option<&[(usize, f64)]> {
        self.entries[packed_index(self.size, k, l)].as_deref()
    }
}

fn resolve(basis: &EigenBasis, terms: Vec<(EigenFunction, f64)>) -> Result<Vec<(usize, f64)>> {
    terms
        .into_iter()
        .map(|(f, c)| {
            basis
                .position(f.kind, &f.index)
                .map(|h| (h, c))
                .ok_or_else(|| OismError::Capacity {
                    what: format!(
                        "extended basis lacks product target {:?} {:?} (eigenvalue {})",
                        f.kind, f.index, f.eigenvalue
                    ),
                    required: (-f.eigenvalue) as usize,
                    available: basis
                        .extended()
                        .iter()
                        .map(|g| (-g.eigenvalue) as usize)
                        .max()
                        .unwrap_or(0),
                })
        })
        .collect()
}

fn hermite_pair(
    basis: &EigenBasis,
    table: &super::HermiteProductTable,
    k: usize,
    l: usize,
) -> Result<Option<Vec<(usize, f64)>>> {
    let fk = &basis.functions()[k];
    let fl = &basis.functions()[l];
    if fk.kind == FunctionKind::Constant {
        return Ok(Some(vec![(l, 1.0)]));
    }
    if fl.kind == FunctionKind::Constant {
        return Ok(Some(vec![(k, 1.0)]));
    }
    let sk = basis.support(k);
    let sl = basis.support(l);
    if sk.len() != 1 || sl.len() != 1 {
        return Err(OismError::Unsupported(
            "product expansion of tensor Hermite functions".into(),
        ));
    }
    let (ik, nk) = sk[0];
    let (il, nl) = sl[0];
    if ik != il {
        return Ok(None);
    }
    let dim = basis.dimension();
    let mut out = Vec::new();
    for &(h, beta) in table.get(nk as usize, nl as usize) {
        let idx = if h == 0 {
            Some(0)
        } else {
            let mut orders = vec![0; dim];
            orders[ik] = h as i32;
            basis.position(FunctionKind::Hermite, &orders)
        };
        match idx {
            Some(i) => out.push((i, beta)),
            None => {
                return Err(OismError::Capacity {
                    what: format!("extended hermite order in coordinate {ik}"),
                    required: h,
                    available: table.extended_max(),
                })
            }
        }
    }
    Ok(Some(out))
}
