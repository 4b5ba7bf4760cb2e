//! Index censuses and the integer identities they must satisfy: Euler sums,
//! duality between `dist_Y|_X` and `dist_X|_Y`, and Morse inequalities.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypersurface::CriticalPoint;
use crate::pointcloud::CloudCritical;

/// Counts of critical points by `(k, ι)` plus optional topological data.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CensusFile", into = "CensusFile")]
pub struct IndexCensus {
    pub counts: BTreeMap<(usize, usize), usize>,
    pub chi_x: Option<i64>,
    pub chi_y: Option<i64>,
    pub chi_xy: Option<i64>,
    pub betti_x: Option<Vec<i64>>,
    pub betti_xy: Option<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct CountEntry {
    k: usize,
    iota: usize,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct CensusFile {
    counts: Vec<CountEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chi_x: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chi_y: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chi_xy: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    betti_x: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    betti_xy: Option<Vec<i64>>,
}

impl TryFrom<CensusFile> for IndexCensus {
    type Error = Error;

    fn try_from(f: CensusFile) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for e in f.counts {
            if counts.insert((e.k, e.iota), e.n).is_some() {
                return Err(Error::Invalid(format!(
                    "census lists (k={}, iota={}) twice",
                    e.k, e.iota
                )));
            }
        }
        for b in f.betti_x.iter().chain(&f.betti_xy).flatten() {
            if *b < 0 {
                return Err(Error::Invalid("negative Betti number".into()));
            }
        }
        Ok(IndexCensus {
            counts,
            chi_x: f.chi_x,
            chi_y: f.chi_y,
            chi_xy: f.chi_xy,
            betti_x: f.betti_x,
            betti_xy: f.betti_xy,
        })
    }
}

impl From<IndexCensus> for CensusFile {
    fn from(c: IndexCensus) -> Self {
        CensusFile {
            counts: c
                .counts
                .into_iter()
                .filter(|(_, n)| *n > 0)
                .map(|((k, iota), n)| CountEntry { k, iota, n })
                .collect(),
            chi_x: c.chi_x,
            chi_y: c.chi_y,
            chi_xy: c.chi_xy,
            betti_x: c.betti_x,
            betti_xy: c.betti_xy,
        }
    }
}

/// Euler characteristic and Betti numbers of a few standard spaces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub chi: i64,
    pub betti: Vec<i64>,
}

impl Topology {
    /// `circle`, `sphere`, `point`, `torus`, `empty`, `ovals:N` (disjoint
    /// circles) or `points:N`.
    pub fn builtin(name: &str) -> Result<Topology> {
        let t = |chi: i64, betti: &[i64]| Topology {
            chi,
            betti: betti.to_vec(),
        };
        let count = |s: &str| -> Result<i64> {
            s.parse::<i64>()
                .ok()
                .filter(|c| *c >= 0)
                .ok_or_else(|| Error::Invalid(format!("bad component count in {name:?}")))
        };
        Ok(match name {
            "circle" => t(0, &[1, 1]),
            "sphere" => t(2, &[1, 0, 1]),
            "point" => t(1, &[1]),
            "torus" => t(0, &[1, 2, 1]),
            "empty" => t(0, &[]),
            _ => match name.split_once(':') {
                Some(("ovals", c)) => {
                    let c = count(c)?;
                    if c == 0 {
                        t(0, &[])
                    } else {
                        t(0, &[c, c])
                    }
                }
                Some(("points", c)) => {
                    let c = count(c)?;
                    if c == 0 {
                        t(0, &[])
                    } else {
                        t(c, &[c])
                    }
                }
                _ => return Err(Error::Invalid(format!("unknown topology {name:?}"))),
            },
        })
    }
}

impl IndexCensus {
    /// Tally of validated, nondegenerate, classified critical points.
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a CriticalPoint>) -> IndexCensus {
        let mut c = IndexCensus::default();
        for p in points {
            if let (true, true, Some(iota)) = (p.validated, p.nondegenerate, p.iota) {
                *c.counts.entry((p.k, iota)).or_default() += 1;
            }
        }
        c
    }

    pub fn from_cloud(criticals: &[CloudCritical]) -> IndexCensus {
        let mut c = IndexCensus::default();
        for p in criticals {
            *c.counts.entry((p.k, p.iota)).or_default() += 1;
        }
        c
    }

    pub fn with_x(mut self, t: &Topology) -> Self {
        self.chi_x = Some(t.chi);
        self.betti_x = Some(t.betti.clone());
        self
    }

    pub fn with_y(mut self, t: &Topology) -> Self {
        self.chi_y = Some(t.chi);
        self
    }

    pub fn with_xy(mut self, t: &Topology) -> Self {
        self.chi_xy = Some(t.chi);
        self.betti_xy = Some(t.betti.clone());
        self
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("census serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Invalid(format!("census JSON: {e}")))
    }

    /// `Σ_{k+ι=i} #C_{k,ι}`.
    fn attached(&self, i: usize) -> i64 {
        self.counts
            .iter()
            .filter(|((k, iota), _)| k + iota == i)
            .map(|(_, n)| *n as i64)
            .sum()
    }

    fn top(&self) -> usize {
        let from_counts = self.counts.keys().map(|(k, i)| k + i).max().unwrap_or(0);
        let len = |b: &Option<Vec<i64>>| b.as_ref().map_or(0, |v| v.len().saturating_sub(1));
        from_counts.max(len(&self.betti_x)).max(len(&self.betti_xy))
    }
}

fn sign(e: usize) -> i64 {
    if e.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `Σ (−1)^{k+ι} #C_{k,ι}`.
pub fn euler_sum(census: &IndexCensus) -> i64 {
    census
        .counts
        .iter()
        .map(|((k, iota), n)| sign(k + iota) * *n as i64)
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityVerdict {
    pub lhs: i64,
    pub rhs: i64,
    pub holds: bool,
}

impl fmt::Display for IdentityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds {
            write!(f, "{} = {}", self.lhs, self.rhs)
        } else {
            write!(f, "{} ≠ {}", self.lhs, self.rhs)
        }
    }
}

/// `χ(X∩Y) + Σ(−1)^{k+ι}#C_{k,ι} = χ(X)`.
pub fn check_euler(census: &IndexCensus) -> Result<IdentityVerdict> {
    let chi_x = census.chi_x.ok_or_else(|| Error::Missing("chi_x".into()))?;
    let chi_xy = census
        .chi_xy
        .ok_or_else(|| Error::Missing("chi_xy".into()))?;
    let lhs = chi_xy + euler_sum(census);
    Ok(IdentityVerdict {
        lhs,
        rhs: chi_x,
        holds: lhs == chi_x,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityVerdict {
    /// `χ(Y) + Σ(−1)^{k+ι}#C_{k,ι}(X,Y)`.
    pub lhs: i64,
    /// `χ(X) + Σ(−1)^{k+ι}#C_{k,ι}(Y,X)`.
    pub rhs: i64,
    pub holds: bool,
}

impl fmt::Display for DualityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds {
            write!(f, "duality holds: {} = {}", self.lhs, self.rhs)
        } else {
            write!(f, "duality fails: {} ≠ {}", self.lhs, self.rhs)
        }
    }
}

/// Compares the census of `dist_Y|_X` with that of `dist_X|_Y`. In `yx` the
/// roles are swapped, so its `chi_x` is `χ(Y)`.
pub fn check_duality(xy: &IndexCensus, yx: &IndexCensus) -> Result<DualityVerdict> {
    let need = |v: Option<i64>, what: &str| v.ok_or_else(|| Error::Missing(what.into()));
    let chi_x = need(xy.chi_x, "chi_x of the X,Y census")?;
    let chi_y = need(xy.chi_y, "chi_y of the X,Y census")?;
    let chi_y_swapped = need(yx.chi_x, "chi_x of the Y,X census")?;
    let chi_x_swapped = need(yx.chi_y, "chi_y of the Y,X census")?;
    if chi_x != chi_x_swapped || chi_y != chi_y_swapped {
        return Err(Error::Invalid(format!(
            "censuses disagree on Euler characteristics: χ(X) {chi_x} vs {chi_x_swapped}, χ(Y) {chi_y} vs {chi_y_swapped}"
        )));
    }
    let lhs = chi_y + euler_sum(xy);
    let rhs = chi_x + euler_sum(yx);
    Ok(DualityVerdict {
        lhs,
        rhs,
        holds: lhs == rhs,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseVerdict {
    pub lambda: usize,
    pub strong_lhs: i64,
    pub strong_rhs: i64,
    pub strong: bool,
    pub weak_lhs: i64,
    pub weak_rhs: i64,
    pub weak: bool,
}

/// Strong and weak Morse inequalities for `λ = 0..=top`, where `top` covers
/// the Betti vectors and every `k + ι` in the census.
pub fn morse_inequalities(census: &IndexCensus) -> Result<Vec<MorseVerdict>> {
    let bx = census
        .betti_x
        .as_ref()
        .ok_or_else(|| Error::Missing("betti_x".into()))?;
    let bxy = census
        .betti_xy
        .as_ref()
        .ok_or_else(|| Error::Missing("betti_xy".into()))?;
    let at = |v: &[i64], i: usize| v.get(i).copied().unwrap_or(0);
    let mut out = Vec::new();
    for lambda in 0..=census.top() {
        let (mut l, mut r) = (0, 0);
        for i in 0..=lambda {
            let s = sign(i + lambda);
            l += s * at(bx, i);
            r += s * (at(bxy, i) + census.attached(i));
        }
        let (wl, wr) = (at(bx, lambda), at(bxy, lambda) + census.attached(lambda));
        out.push(MorseVerdict {
            lambda,
            strong_lhs: l,
            strong_rhs: r,
            strong: l <= r,
            weak_lhs: wl,
            weak_rhs: wr,
            weak: wl <= wr,
        });
    }
    Ok(out)
}

/// Dimensions `k + ι` of the spheres attached at the critical points, sorted.
pub fn attachment_spheres(census: &IndexCensus) -> Vec<usize> {
    let mut dims = Vec::new();
    for ((k, iota), n) in &census.counts {
        dims.extend(std::iter::repeat_n(k + iota, *n));
    }
    dims.sort_unstable();
    dims
}
