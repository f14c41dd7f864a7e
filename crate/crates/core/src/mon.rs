//! Minimum observable node (MON) search.
//!
//! The greedy heuristic grows a sensor set one node at a time, always taking
//! the node whose addition raises the generic rank of the NOM the most.
//! Candidate comparisons reuse one fixed random field point per hypergraph
//! so they never flicker; the final set is confirmed with a fresh full
//! certificate. An exhaustive oracle checks all small subsets for
//! ground-truth minimality at desk scale.

use serde::{Deserialize, Serialize};

use crate::dynamics::{sensor_matrix, SensorSet};
use crate::error::{Error, Result};
use crate::hypergraph::{
    complete_hypergraph, hyperchain, hyperring, hyperstar, k_subsets, Hypergraph, NodeId,
};
use crate::observability::{
    matrix_rank, nom_symbolic, observation_stack, verdict_for_sensors, ObsOptions,
    ObservabilityVerdict, VerdictJson,
};
use crate::scalar::{derive_seed, rat_to_fp, Fp, SplitMix64};

const MON_POINT_TAG: u64 = 0x6d6f_6e70; // "monp"

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonMethod {
    Greedy,
    Exhaustive,
}

/// One greedy step: the node chosen and the probe rank after adding it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyStep {
    pub node: NodeId,
    pub rank: usize,
}

/// A sensor set that renders the hypergraph observable, with provenance.
#[derive(Clone, Debug)]
pub struct MonReport {
    pub hypergraph: String,
    pub n: usize,
    pub method: MonMethod,
    pub sensors: SensorSet,
    pub size: usize,
    pub trace: Vec<GreedyStep>,
    pub seed: u64,
    pub verdict: ObservabilityVerdict,
}

/// JSON view of a MON report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonReportJson {
    pub hypergraph: String,
    pub n: usize,
    pub method: MonMethod,
    pub sensors: Vec<NodeId>,
    pub size: usize,
    pub trace: Vec<GreedyStep>,
    pub seed: u64,
    pub verdict: VerdictJson,
}

impl MonReport {
    pub fn to_json(&self) -> MonReportJson {
        MonReportJson {
            hypergraph: self.hypergraph.clone(),
            n: self.n,
            method: self.method,
            sensors: self.sensors.to_vec(),
            size: self.size,
            trace: self.trace.clone(),
            seed: self.seed,
            verdict: self.verdict.to_json(&self.sensors),
        }
    }
}

/// Per-node NOM blocks evaluated at one fixed field point: block `v` holds
/// the gradient rows of `L^0..L^r` of the single output `x_v`. The rows of
/// any sensor set are the concatenation of its node blocks, so candidate
/// ranks during search need no fresh symbolic work.
struct NodeBlocks {
    blocks: Vec<Vec<Vec<Fp>>>,
    n: usize,
}

impl NodeBlocks {
    fn build(g: &Hypergraph, opts: &ObsOptions, point_attempt: u64) -> Result<Self> {
        let n = g.node_count();
        let prime = *opts
            .rank
            .primes
            .first()
            .ok_or_else(|| Error::InvalidInput("rank test needs at least one prime".into()))?;
        crate::observability::check_prime(prime, 0)?;
        let seed = derive_seed(opts.rank.seed, &[MON_POINT_TAG, point_attempt]);
        let point = SplitMix64::new(seed).field_point(n, prime);
        let depth = opts.depth.unwrap_or(n);
        let mut blocks = Vec::with_capacity(n);
        for v in 1..=n {
            let c = sensor_matrix(&SensorSet::new([v]), n)?;
            let stack = observation_stack(g, &c, depth, &opts.caps)?;
            let nom = nom_symbolic(&stack);
            let rows: Vec<Vec<Fp>> = nom
                .rows()
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|p| {
                            p.try_map_coeffs(&mut |c| rat_to_fp(c, prime))
                                .map(|q| q.evaluate(&point))
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            blocks.push(rows);
        }
        Ok(NodeBlocks { blocks, n })
    }

    fn rank_of(&self, sensors: &SensorSet) -> usize {
        let mut rows = Vec::new();
        for v in sensors.iter() {
            rows.extend(self.blocks[v - 1].iter().cloned());
        }
        matrix_rank(rows)
    }

    fn full_rank(&self) -> usize {
        self.n
    }
}

/// Greedy MON search: start empty, repeatedly add the node maximizing the
/// probe rank (ties to the lowest index), stop at rank `n`, then confirm
/// the set with a fresh certificate.
pub fn greedy_mon(g: &Hypergraph, opts: &ObsOptions) -> Result<MonReport> {
    // a failed confirmation means the probe point was unlucky; redraw and
    // retry rather than trusting either side blindly
    for attempt in 0..4 {
        let blocks = NodeBlocks::build(g, opts, attempt)?;
        let (sensors, trace) = greedy_loop(&blocks)?;
        let verdict = verdict_for_sensors(g, &sensors, opts)?;
        if verdict.observable {
            return Ok(MonReport {
                hypergraph: g.structural_id(),
                n: g.node_count(),
                method: MonMethod::Greedy,
                size: sensors.len(),
                sensors,
                trace,
                seed: opts.rank.seed,
                verdict,
            });
        }
    }
    Err(Error::InvalidInput(
        "greedy selection failed to confirm after 4 probe points".into(),
    ))
}

fn greedy_loop(blocks: &NodeBlocks) -> Result<(SensorSet, Vec<GreedyStep>)> {
    let n = blocks.n;
    let target = blocks.full_rank();
    let mut sensors = SensorSet::empty();
    let mut trace = Vec::new();
    let mut rank = 0;
    while rank < target {
        if sensors.len() == n {
            // with every node sensed the level-0 rows already span; getting
            // here means the probe arithmetic is broken
            return Err(Error::NoObservableSet { max_size: n });
        }
        let mut best: Option<(usize, NodeId)> = None;
        for v in 1..=n {
            if sensors.contains(v) {
                continue;
            }
            let r = blocks.rank_of(&sensors.with(v));
            if best.is_none_or(|(br, _)| r > br) {
                best = Some((r, v));
            }
        }
        let (r, v) = best.expect("candidates remain");
        sensors.insert(v);
        rank = r;
        trace.push(GreedyStep { node: v, rank: r });
    }
    Ok((sensors, trace))
}

/// Exhaustive MON search over all sensor sets of size `1..=max_size` in
/// lexicographic order; the first observable set is minimal (ties broken
/// lexicographically). Guarded: refuses more than 5000 rank tests.
pub fn exhaustive_mon(g: &Hypergraph, max_size: usize, opts: &ObsOptions) -> Result<MonReport> {
    const GUARD: usize = 5000;
    let n = g.node_count();
    let max_size = max_size.min(n);
    let mut required: u128 = 0;
    for s in 1..=max_size {
        required += binomial(n, s);
    }
    if required > GUARD as u128 {
        return Err(Error::SearchGuardExceeded {
            required,
            cap: GUARD,
        });
    }
    for attempt in 0..4 {
        let blocks = NodeBlocks::build(g, opts, attempt)?;
        let mut found: Option<SensorSet> = None;
        'sizes: for s in 1..=max_size {
            for subset in k_subsets(n, s) {
                let sensors = SensorSet::new(subset);
                if blocks.rank_of(&sensors) == n {
                    found = Some(sensors);
                    break 'sizes;
                }
            }
        }
        let Some(sensors) = found else {
            return Err(Error::NoObservableSet { max_size });
        };
        let verdict = verdict_for_sensors(g, &sensors, opts)?;
        if verdict.observable {
            return Ok(MonReport {
                hypergraph: g.structural_id(),
                n,
                method: MonMethod::Exhaustive,
                size: sensors.len(),
                sensors,
                trace: Vec::new(),
                seed: opts.rank.seed,
                verdict,
            });
        }
    }
    Err(Error::InvalidInput(
        "exhaustive search failed to confirm after 4 probe points".into(),
    ))
}

fn binomial(n: usize, k: usize) -> u128 {
    num_integer::binomial(n as u128, k as u128)
}

// ---------------------------------------------------------------------------
// Canonical-topology experiment
// ---------------------------------------------------------------------------

/// The four canonical topology families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyFamily {
    Chain,
    Ring,
    Star,
    Complete,
}

impl TopologyFamily {
    pub const ALL: [TopologyFamily; 4] = [
        TopologyFamily::Chain,
        TopologyFamily::Ring,
        TopologyFamily::Star,
        TopologyFamily::Complete,
    ];

    pub fn generate(&self, n: usize, k: usize) -> Result<Hypergraph> {
        match self {
            TopologyFamily::Chain => hyperchain(n, k),
            TopologyFamily::Ring => hyperring(n, k),
            TopologyFamily::Star => hyperstar(n, k),
            TopologyFamily::Complete => complete_hypergraph(n, k),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TopologyFamily::Chain => "chain",
            TopologyFamily::Ring => "ring",
            TopologyFamily::Star => "star",
            TopologyFamily::Complete => "complete",
        }
    }
}

impl std::str::FromStr for TopologyFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chain" => Ok(TopologyFamily::Chain),
            "ring" => Ok(TopologyFamily::Ring),
            "star" => Ok(TopologyFamily::Star),
            "complete" => Ok(TopologyFamily::Complete),
            other => Err(Error::InvalidInput(format!(
                "unknown family '{other}' (chain|ring|star|complete)"
            ))),
        }
    }
}

/// One column of the edge-density experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentColumn {
    pub column: String,
    /// Reason the column was skipped (degenerate n), if it was.
    pub skipped: Option<String>,
    pub mon: Option<MonReportJson>,
}

/// Greedy MON sizes for a family at three 3-way edge densities: none, a
/// single added 3-way hyperedge, and all 3-way edges of the k = 3 generator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub family: String,
    pub n: usize,
    pub seed: u64,
    pub columns: Vec<ExperimentColumn>,
}

pub const EXPERIMENT_COLUMNS: [&str; 3] = ["pairwise", "pairwise+one3", "pairwise+all3"];

/// Run the three-column experiment for one family. The added single 3-way
/// edge is canonically the lexicographically first 3-subset `{1,2,3}`.
pub fn monotonicity_experiment(
    family: TopologyFamily,
    n: usize,
    opts: &ObsOptions,
) -> Result<ExperimentReport> {
    let pairwise = family.generate(n, 2)?;
    let mut columns = Vec::new();

    let run = |g: &Hypergraph| -> Result<MonReportJson> { Ok(greedy_mon(g, opts)?.to_json()) };

    columns.push(ExperimentColumn {
        column: EXPERIMENT_COLUMNS[0].into(),
        skipped: None,
        mon: Some(run(&pairwise)?),
    });

    if n < 3 {
        let note = format!("n = {n} admits no 3-way hyperedges");
        for col in &EXPERIMENT_COLUMNS[1..] {
            columns.push(ExperimentColumn {
                column: (*col).into(),
                skipped: Some(note.clone()),
                mon: None,
            });
        }
    } else {
        let one3 = pairwise.union(&Hypergraph::new(n, vec![vec![1, 2, 3]])?)?;
        columns.push(ExperimentColumn {
            column: EXPERIMENT_COLUMNS[1].into(),
            skipped: None,
            mon: Some(run(&one3)?),
        });
        let all3 = pairwise.union(&family.generate(n, 3)?)?;
        columns.push(ExperimentColumn {
            column: EXPERIMENT_COLUMNS[2].into(),
            skipped: None,
            mon: Some(run(&all3)?),
        });
    }

    Ok(ExperimentReport {
        family: family.name().into(),
        n,
        seed: opts.rank.seed,
        columns,
    })
}

impl ExperimentReport {
    /// CSV rows `family,n,column,mon_size,sensors` under a seed comment.
    /// Sensors are semicolon-joined; skipped columns carry the note.
    pub fn to_csv_rows(&self) -> String {
        let mut s = String::new();
        for col in &self.columns {
            match (&col.mon, &col.skipped) {
                (Some(mon), _) => {
                    let sensors = mon
                        .sensors
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(";");
                    s.push_str(&format!(
                        "{},{},{},{},{}\n",
                        self.family, self.n, col.column, mon.size, sensors
                    ));
                }
                (None, Some(note)) => {
                    s.push_str(&format!(
                        "{},{},{},,skipped: {}\n",
                        self.family, self.n, col.column, note
                    ));
                }
                (None, None) => unreachable!("column has neither result nor note"),
            }
        }
        s
    }

    pub fn csv_header(seed: u64) -> String {
        format!("# seed={seed}\nfamily,n,column,mon_size,sensors\n")
    }
}
