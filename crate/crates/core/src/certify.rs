//! `MatchAndCertify`: a boosted matching plus, when the dense side had to be
//! sampled, a certificate matching that is disjoint from the sparse side.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::boost::{boosted_matching_with, BoostParams, BoostStats};
use crate::error::Result;
use crate::graph::MatrixAccess;
use crate::matching::Matching;
use crate::static_matcher::SparseIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// No certificate; the call never needed the dense side.
    C1,
    /// Certificate present.
    C2,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub matching: Matching,
    /// Degree proxy `d` of the selected candidate.
    pub degree_proxy: f64,
    /// Sampling round that produced the selected candidate.
    pub return_iteration: usize,
    pub rebuild_index: u64,
    pub phase_index: u64,
    /// Size of the selected candidate before sparse edges were removed.
    pub unfiltered_size: usize,
}

/// Per-candidate record kept for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub size: usize,
    pub greedy_size: usize,
    pub degree_proxy: f64,
    pub return_iteration: usize,
    pub delta: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub matching: Matching,
    pub certificate: Option<Certificate>,
    pub condition: Condition,
    /// Sampling ran but every candidate was empty after filtering, so the
    /// outcome was reported as C1.
    pub downgraded: bool,
    pub candidates: Vec<CandidateSummary>,
    pub stats: BoostStats,
}

pub fn match_and_certify<M, R>(dense: &M, sparse: &SparseIndex, eps: f64, rng: &mut R) -> Result<SolveOutcome>
where
    M: MatrixAccess + ?Sized,
    R: Rng + ?Sized,
{
    let params = BoostParams::for_epsilon(eps)?;
    match_and_certify_with(dense, sparse, eps, &params, rng)
}

/// Runs the booster, then picks the nonempty candidate with the smallest
/// degree proxy (earliest on ties) and strips its sparse edges.
pub fn match_and_certify_with<M, R>(
    dense: &M,
    sparse: &SparseIndex,
    eps: f64,
    params: &BoostParams,
    rng: &mut R,
) -> Result<SolveOutcome>
where
    M: MatrixAccess + ?Sized,
    R: Rng + ?Sized,
{
    let boosted = boosted_matching_with(dense, sparse, eps, params, rng)?;
    let candidates: Vec<CandidateSummary> = boosted
        .candidates
        .iter()
        .map(|c| CandidateSummary {
            size: c.matching.len(),
            greedy_size: c.greedy_size,
            degree_proxy: c.degree_proxy,
            return_iteration: c.return_iteration,
            delta: c.delta,
        })
        .collect();

    let selected = boosted
        .candidates
        .iter()
        .filter(|c| !c.matching.is_empty())
        .fold(None, |best: Option<&crate::static_matcher::CertificateCandidate>, c| match best {
            Some(b) if b.degree_proxy <= c.degree_proxy => Some(b),
            _ => Some(c),
        });

    let sampled = !boosted.candidates.is_empty();
    let certificate = selected.and_then(|c| {
        let n = c.matching.n();
        let kept = c.matching.edges().into_iter().filter(|&e| !sparse.contains(e));
        let filtered = Matching::from_edges(n, kept).expect("subset of a matching");
        (!filtered.is_empty()).then(|| Certificate {
            matching: filtered,
            degree_proxy: c.degree_proxy,
            return_iteration: c.return_iteration,
            rebuild_index: 0,
            phase_index: 0,
            unfiltered_size: c.matching.len(),
        })
    });

    let condition = if certificate.is_some() {
        Condition::C2
    } else {
        Condition::C1
    };
    Ok(SolveOutcome {
        matching: boosted.matching,
        downgraded: sampled && certificate.is_none(),
        certificate,
        condition,
        candidates,
        stats: boosted.stats,
    })
}
