//! Domain-level analysis: agglomerative clustering of concepts under a
//! hybrid dissimilarity combining LSA distance with the squared gap in
//! feature-fit level, cut into K semantic domains.

use std::collections::BTreeMap;
use std::io::Write;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::numerics::median;
use crate::{Error, Result};

/// Hybrid dissimilarity: `||lsa_i - lsa_j||_2 + alpha * (ff_i - ff_j)^2`,
/// with feature fits already normalized to [0, 1].
pub fn concept_distance(
    lsa_i: &[f64],
    lsa_j: &[f64],
    ff_i: f64,
    ff_j: f64,
    alpha: f64,
) -> Result<f64> {
    if lsa_i.len() != lsa_j.len() {
        return Err(Error::InvalidInput(format!(
            "LSA vectors differ in dimension: {} vs {}",
            lsa_i.len(),
            lsa_j.len()
        )));
    }
    if alpha < 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!(
            "alpha must be finite and nonnegative, got {alpha}"
        )));
    }
    let euclid = lsa_i
        .iter()
        .zip(lsa_j)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let gap = ff_i - ff_j;
    Ok(euclid + alpha * gap * gap)
}

/// Assignment of every concept to one of K contiguous domain ids. Domain ids
/// are ordered by each domain's lexicographically smallest member.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainClustering {
    pub alpha: f64,
    pub k: usize,
    /// concept -> domain id in 0..k
    pub assignments: BTreeMap<String, usize>,
}

impl DomainClustering {
    pub fn members(&self, domain: usize) -> Vec<&str> {
        // BTreeMap iteration keeps members lexicographic
        self.assignments
            .iter()
            .filter_map(|(c, &d)| (d == domain).then_some(c.as_str()))
            .collect()
    }
}

/// Bottom-up average-linkage clustering under the hybrid dissimilarity,
/// stopped at `k` clusters.
///
/// `median_ff` is in percent (as produced by the feature view) and is
/// normalized to [0, 1] internally so alpha's scale does not depend on the
/// score units. Ties in the merge step break toward the pair whose
/// lexicographically smallest members compare lowest, which also makes the
/// output independent of input order.
pub fn agglomerate(
    concepts: &[String],
    lsa_vectors: ArrayView2<f64>,
    median_ff: &[f64],
    alpha: f64,
    k: usize,
) -> Result<DomainClustering> {
    let n = concepts.len();
    if n == 0 {
        return Err(Error::InvalidInput("no concepts to cluster".into()));
    }
    if lsa_vectors.nrows() != n || median_ff.len() != n {
        return Err(Error::InvalidInput(
            "concepts, LSA rows, and feature fits must have equal lengths".into(),
        ));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidInput(format!(
            "cluster count {k} out of range 1..={n}"
        )));
    }

    // canonical order: sort concepts (with their rows) lexicographically
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| concepts[a].cmp(&concepts[b]));
    let sorted_concepts: Vec<&String> = order.iter().map(|&i| &concepts[i]).collect();
    if sorted_concepts.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("duplicate concept names".into()));
    }
    let rows: Vec<Vec<f64>> = order.iter().map(|&i| lsa_vectors.row(i).to_vec()).collect();
    let ff: Vec<f64> = order.iter().map(|&i| median_ff[i] / 100.0).collect();

    let mut dist = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = concept_distance(&rows[i], &rows[j], ff[i], ff[j], alpha)?;
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }

    // active clusters keyed by their smallest member index
    let mut active: Vec<bool> = vec![true; n];
    let mut sizes: Vec<f64> = vec![1.0; n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut cluster_count = n;

    while cluster_count > k {
        // find the closest active pair; ties break on the (i, j) index pair,
        // which is the lexicographic member-pair order
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if !active[j] {
                    continue;
                }
                let d = dist[i][j];
                let better = match best {
                    None => true,
                    Some((_, _, bd)) => d < bd,
                };
                if better {
                    best = Some((i, j, d));
                }
            }
        }
        let (i, j, _) = best.expect("more than k clusters remain");

        // average linkage (Lance-Williams): d(i+j, c) weighted by sizes
        for c in 0..n {
            if !active[c] || c == i || c == j {
                continue;
            }
            let d = (sizes[i] * dist[i][c] + sizes[j] * dist[j][c]) / (sizes[i] + sizes[j]);
            dist[i][c] = d;
            dist[c][i] = d;
        }
        let moved = std::mem::take(&mut members[j]);
        members[i].extend(moved);
        sizes[i] += sizes[j];
        active[j] = false;
        cluster_count -= 1;
    }

    // domains ordered by smallest member; the scan index is already that
    let mut assignments = BTreeMap::new();
    let mut domain = 0usize;
    for i in 0..n {
        if !active[i] {
            continue;
        }
        for &m in &members[i] {
            assignments.insert(sorted_concepts[m].clone(), domain);
        }
        domain += 1;
    }
    Ok(DomainClustering {
        alpha,
        k,
        assignments,
    })
}

/// One row of the domain report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainSummary {
    pub domain: usize,
    pub size: usize,
    /// Median over the member concepts' median feature fits, percent.
    pub median_ff: f64,
    pub members: Vec<String>,
}

/// Per-domain membership and median feature fit (percent). `median_ff` maps
/// each clustered concept to its feature-view score.
pub fn domain_summary(
    clustering: &DomainClustering,
    median_ff: &BTreeMap<String, f64>,
) -> Result<Vec<DomainSummary>> {
    let mut summaries = Vec::with_capacity(clustering.k);
    for domain in 0..clustering.k {
        let members: Vec<String> = clustering
            .members(domain)
            .into_iter()
            .map(str::to_string)
            .collect();
        if members.is_empty() {
            return Err(Error::InvalidInput(format!(
                "domain {domain} has no members; clustering is inconsistent"
            )));
        }
        let scores: Vec<f64> = members
            .iter()
            .map(|m| {
                median_ff.get(m).copied().ok_or_else(|| {
                    Error::InvalidInput(format!("no feature fit for concept {m:?}"))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        summaries.push(DomainSummary {
            domain,
            size: members.len(),
            median_ff: median(&scores),
            members,
        });
    }
    Ok(summaries)
}

/// Domain CSV: domain id, size, median feature fit, members joined by ';'.
pub fn write_domain_csv(summaries: &[DomainSummary], out: &mut impl Write) -> Result<()> {
    writeln!(out, "domain,size,median_ff,members")?;
    for s in summaries {
        writeln!(
            out,
            "{},{},{},{}",
            s.domain,
            s.size,
            s.median_ff,
            s.members.join(";")
        )?;
    }
    Ok(())
}

/// Per-concept plot rows: concept, domain id, median feature fit.
pub fn write_concept_domain_csv(
    clustering: &DomainClustering,
    median_ff: &BTreeMap<String, f64>,
    out: &mut impl Write,
) -> Result<()> {
    writeln!(out, "concept,domain,median_ff")?;
    for (concept, &domain) in &clustering.assignments {
        let ff = median_ff
            .get(concept)
            .ok_or_else(|| Error::InvalidInput(format!("no feature fit for {concept:?}")))?;
        writeln!(out, "{concept},{domain},{ff}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::Array2;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn distance_hand_arithmetic() {
        // ||(0,0)-(3,4)|| = 5; alpha * (0.5-0.7)^2 = 10 * 0.04 = 0.4
        let d = concept_distance(&[0.0, 0.0], &[3.0, 4.0], 0.5, 0.7, 10.0).unwrap();
        assert_relative_eq!(d, 5.4);
    }

    #[test]
    fn distance_identity_and_alpha_zero() {
        assert_relative_eq!(
            concept_distance(&[1.0, 2.0], &[1.0, 2.0], 0.3, 0.3, 5.0).unwrap(),
            0.0
        );
        let d = concept_distance(&[0.0], &[2.0], 0.1, 0.9, 0.0).unwrap();
        assert_relative_eq!(d, 2.0);
    }

    #[test]
    fn distance_symmetric_positive() {
        let a = [0.1, -0.4, 2.0];
        let b = [1.0, 0.3, -0.5];
        let ab = concept_distance(&a, &b, 0.2, 0.8, 3.0).unwrap();
        let ba = concept_distance(&b, &a, 0.8, 0.2, 3.0).unwrap();
        assert_relative_eq!(ab, ba);
        assert!(ab > 0.0);
    }

    #[test]
    fn negative_alpha_rejected() {
        assert!(concept_distance(&[0.0], &[1.0], 0.1, 0.2, -1.0).is_err());
    }

    fn two_blobs(rng: &mut ChaCha8Rng, per_blob: usize) -> (Vec<String>, Array2<f64>, Vec<f64>) {
        let n = per_blob * 2;
        let mut vectors = Array2::<f64>::zeros((n, 2));
        let mut names = Vec::new();
        let mut ff = Vec::new();
        for i in 0..n {
            let blob = i / per_blob;
            let center = if blob == 0 { 0.0 } else { 50.0 };
            vectors[(i, 0)] = center + rng.gen_range(-1.0..1.0);
            vectors[(i, 1)] = center + rng.gen_range(-1.0..1.0);
            names.push(format!("concept{i:02}"));
            ff.push(if blob == 0 { 30.0 } else { 70.0 });
        }
        (names, vectors, ff)
    }

    #[test]
    fn two_blobs_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (names, vectors, ff) = two_blobs(&mut rng, 8);
        let clustering = agglomerate(&names, vectors.view(), &ff, 1.0, 2).unwrap();
        for i in 0..8 {
            assert_eq!(clustering.assignments[&format!("concept{i:02}")], 0);
            assert_eq!(clustering.assignments[&format!("concept{:02}", i + 8)], 1);
        }
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let (names, vectors, ff) = two_blobs(&mut rng, 4);
        let clustering = agglomerate(&names, vectors.view(), &ff, 1.0, 8).unwrap();
        let mut seen = std::collections::HashSet::new();
        for (_, &d) in &clustering.assignments {
            assert!(seen.insert(d), "domain {d} appears twice");
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn clustering_invariant_to_input_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let (names, vectors, ff) = two_blobs(&mut rng, 6);
        let baseline = agglomerate(&names, vectors.view(), &ff, 2.0, 3).unwrap();

        let mut perm: Vec<usize> = (0..names.len()).collect();
        perm.shuffle(&mut rng);
        let names_p: Vec<String> = perm.iter().map(|&i| names[i].clone()).collect();
        let vectors_p = vectors.select(ndarray::Axis(0), &perm);
        let ff_p: Vec<f64> = perm.iter().map(|&i| ff[i]).collect();
        let shuffled = agglomerate(&names_p, vectors_p.view(), &ff_p, 2.0, 3).unwrap();

        assert_eq!(baseline.assignments, shuffled.assignments);
    }

    #[test]
    fn large_alpha_clusters_by_feature_fit() {
        // vectors identical, feature fits split into two levels: with large
        // alpha the clusters align with the levels
        let names: Vec<String> = (0..6).map(|i| format!("c{i}")).collect();
        let vectors = Array2::<f64>::zeros((6, 2));
        let ff = vec![10.0, 12.0, 11.0, 90.0, 88.0, 91.0];
        let clustering = agglomerate(&names, vectors.view(), &ff, 100.0, 2).unwrap();
        assert_eq!(clustering.assignments["c0"], clustering.assignments["c1"]);
        assert_eq!(clustering.assignments["c0"], clustering.assignments["c2"]);
        assert_eq!(clustering.assignments["c3"], clustering.assignments["c4"]);
        assert_eq!(clustering.assignments["c3"], clustering.assignments["c5"]);
        assert_ne!(clustering.assignments["c0"], clustering.assignments["c3"]);
    }

    #[test]
    fn invalid_k_rejected() {
        let names = vec!["a".to_string(), "b".to_string()];
        let vectors = Array2::<f64>::zeros((2, 2));
        let ff = vec![1.0, 2.0];
        assert!(agglomerate(&names, vectors.view(), &ff, 1.0, 0).is_err());
        assert!(agglomerate(&names, vectors.view(), &ff, 1.0, 3).is_err());
    }

    #[test]
    fn summary_medians_and_singletons() {
        let names: Vec<String> = (0..4).map(|i| format!("c{i}")).collect();
        let mut vectors = Array2::<f64>::zeros((4, 1));
        for i in 0..4 {
            vectors[(i, 0)] = if i < 3 { i as f64 * 0.1 } else { 99.0 };
        }
        let ff = vec![60.0, 70.0, 80.0, 20.0];
        let clustering = agglomerate(&names, vectors.view(), &ff, 0.0, 2).unwrap();
        let ff_map: BTreeMap<String, f64> = names
            .iter()
            .cloned()
            .zip(ff.iter().copied())
            .collect();
        let summaries = domain_summary(&clustering, &ff_map).unwrap();
        assert_eq!(summaries.len(), 2);
        // first domain: c0..c2, median 70; second: singleton c3 with its own ff
        assert_eq!(summaries[0].size, 3);
        assert_relative_eq!(summaries[0].median_ff, 70.0);
        assert_eq!(summaries[1].size, 1);
        assert_relative_eq!(summaries[1].median_ff, 20.0);
        assert_eq!(summaries[1].members, ["c3"]);
    }
}
