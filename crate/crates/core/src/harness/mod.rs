//! Desk-scale benchmarks and the scripted demo behind the `cortex` CLI.
//!
//! Every bench returns a [`BenchReport`] whose verdicts name the acceptance
//! criterion they check. Rows are reproducible bit-for-bit from
//! `(config, seed)`; wall-clock figures only ever appear in notes.

mod clouds;
mod report;

use std::sync::Arc;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::json;

pub use clouds::{clustered_cloud, label_groups, optimal_pair, two_cluster_cloud, voronoi_groups, CloudSpec};
pub use report::{BenchReport, Verdict};

use crate::error::Result;
use crate::gate::decide;
use crate::injector::{encode_thought, River, VirtualPositions};
use crate::model::{relative_error, tokenize, KvCache, ModelConfig, Origin, StepOutput, TokenId, WeightStore};
use crate::prism::{Prism, Role};
use crate::reference::{reference_forward, Row};
use crate::scheduler::{generate_bare, Alignment, RunOutput, RuntimeConfig, Scheduler, Script, ScriptedThought};
use crate::synapse::{
    density_scores, hausdorff_distance, mean_pairwise_reduction, select_hybrid, select_landmarks, PointCloud,
    DEFAULT_LAMBDA,
};

/// Agent counts of the memory sweep.
pub const DEFAULT_AGENT_COUNTS: [usize; 4] = [10, 50, 100, 1000];
/// Context lengths of the compression report.
pub const DEFAULT_LENGTHS: [usize; 5] = [64, 512, 4096, 8192, 32768];
/// Injection equivalence tolerance (relative).
pub const INJECTION_TOLERANCE: f64 = 1e-6;

const FILLER: &[u8] = b"The river keeps talking while the streams think quietly about what it said. ";

/// A river cache of `len` real tokens plus the last step's output.
pub fn river_cache(weights: &WeightStore, len: usize) -> Result<(KvCache, StepOutput)> {
    let mut cache = KvCache::new(weights.config());
    let mut last = None;
    for p in 0..len.max(1) {
        let t = FILLER[p % FILLER.len()] as TokenId;
        last = Some(crate::model::forward_step(weights, &mut cache, t, p)?);
    }
    Ok((cache, last.expect("at least one step")))
}

/// Registers N stream agents, each holding a k-landmark view, and checks
/// `total = weights + N * per_agent` exactly.
pub fn bench_memory(weights: Arc<WeightStore>, agent_counts: &[usize], k: usize) -> Result<BenchReport> {
    let started = Instant::now();
    let cfg = *weights.config();
    let mut report = BenchReport::new(
        "memory",
        &["agents", "weight_bytes", "per_agent_bytes", "delta_bytes", "total_bytes", "closed_form_total"],
    );
    report.param("agent_counts", agent_counts).param("k", k).param("model", cfg);

    let (cache, last) = river_cache(&weights, 256)?;
    let snapshot = select_landmarks(&cache, &last.query, cfg.n_heads, k, DEFAULT_LAMBDA)?;
    let view = snapshot.to_cache(&cfg)?;
    let expected_per_agent = snapshot.len() * cfg.kv_entry_bytes();

    let mut affine = true;
    let mut uniform = true;
    let mut seen_per_agent: Option<usize> = None;
    let mut zero_delta = None;
    for &n in agent_counts {
        let prism = Prism::from_shared(weights.clone());
        let baseline = prism.memory_report().total_bytes;
        for _ in 0..n {
            prism.register_with_cache(Role::Stream, view.clone())?;
        }
        let mem = prism.memory_report();
        let delta = mem.total_bytes - baseline;
        let per_agent = mem.per_agent_bytes.first().map(|(_, b)| *b);
        if mem.per_agent_bytes.iter().any(|(_, b)| Some(*b) != per_agent) {
            uniform = false;
        }
        if let Some(b) = per_agent {
            if *seen_per_agent.get_or_insert(b) != b {
                uniform = false;
            }
        }
        let closed_form = mem.weight_bytes + n * expected_per_agent;
        affine &= mem.total_bytes == closed_form && delta == n * expected_per_agent;
        if n == 0 {
            zero_delta = Some(delta);
        }
        report.row(vec![
            json!(n),
            json!(mem.weight_bytes),
            per_agent.map_or(json!(null), |b| json!(b)),
            json!(delta),
            json!(mem.total_bytes),
            json!(closed_form),
        ]);
    }

    report.verdict(Verdict::new(
        1,
        "total equals weights plus N times per-agent bytes",
        affine,
        format!("weight_bytes={} per_agent={expected_per_agent}", weights.total_bytes()),
    ));
    report.verdict(Verdict::new(
        1,
        "per-agent bytes constant across N",
        uniform && seen_per_agent.is_none_or(|b| b == expected_per_agent),
        format!("observed={seen_per_agent:?} closed_form={expected_per_agent}"),
    ));
    if let Some(d) = zero_delta {
        report.verdict(Verdict::new(1, "no agents adds no bytes", d == 0, format!("delta={d}")));
    }
    report.note(format!("elapsed_ms={}", started.elapsed().as_millis()));
    Ok(report)
}

/// Token and byte ratios of a k-landmark snapshot against the full cache.
pub fn bench_compression(config: &ModelConfig, lengths: &[usize], k: usize, seed: u64) -> Result<BenchReport> {
    let mut report = BenchReport::new(
        "compression",
        &["L", "k", "landmarks", "token_reduction", "full_bytes", "snapshot_bytes", "byte_ratio", "measured_bytes"],
    );
    report.param("lengths", lengths).param("k", k).param("seed", seed);
    let entry = config.kv_entry_bytes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut measured_ok = true;

    for &l in lengths {
        let kept = k.min(l);
        let reduction = 1.0 - kept as f64 / l as f64;
        let (full, snap) = (l * entry, kept * entry);
        let ratio = snap as f64 / full as f64;
        // Lengths that fit the position range are also measured on a real snapshot.
        let measured = if l <= config.max_positions {
            let cache = random_cache(config, l, &mut rng)?;
            let query: Vec<f32> = (0..config.d_model).map(|_| rng.sample::<f32, _>(StandardNormal)).collect();
            let s = select_landmarks(&cache, &query, config.n_heads, k, DEFAULT_LAMBDA)?;
            measured_ok &= s.byte_size(config) == snap && s.len() == kept;
            Some(s.byte_size(config))
        } else {
            None
        };
        report.row(vec![
            json!(l),
            json!(k),
            json!(kept),
            json!(reduction),
            json!(full),
            json!(snap),
            json!(ratio),
            measured.map_or(json!(null), |b| json!(b)),
        ]);
        if k == 64 && l == 4096 {
            report.verdict(Verdict::new(
                2,
                "token reduction at L=4096 is at least 98%",
                reduction >= 0.98 && reduction == 1.0 - 64.0 / 4096.0,
                format!("reduction={:.4}%", reduction * 100.0),
            ));
        }
        if k == 64 && l == 32768 {
            report.verdict(Verdict::new(
                2,
                "byte ratio at L=32768 is at most 1%",
                ratio <= 0.01,
                format!("ratio={:.4}%", ratio * 100.0),
            ));
        }
        if k == 64 && l == 64 {
            report.verdict(Verdict::new(2, "saturated snapshot gives no reduction", reduction == 0.0, format!("{reduction}")));
        }
    }
    report.verdict(Verdict::new(2, "measured snapshot bytes equal the analytic count", measured_ok, "byte_size per snapshot"));
    Ok(report)
}

fn random_cache(config: &ModelConfig, len: usize, rng: &mut ChaCha8Rng) -> Result<KvCache> {
    let mut cache = KvCache::new(config);
    let width = config.n_layers * config.d_model;
    for p in 0..len {
        let keys: Vec<f32> = (0..width).map(|_| rng.sample(StandardNormal)).collect();
        let values: Vec<f32> = (0..width).map(|_| rng.sample(StandardNormal)).collect();
        cache.append(p, Origin::Context, &keys, &values)?;
    }
    Ok(cache)
}

/// Brute-force top-k by density: sort by score descending, index ascending.
pub fn top_k_by_density(density: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..density.len()).collect();
    idx.sort_by(|&a, &b| density[b].total_cmp(&density[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandmarkSettings {
    pub seed: u64,
    /// Clustered clouds in the dominance sweep.
    pub clouds: usize,
    pub k: usize,
    pub lambda: f64,
    pub spec: CloudSpec,
    /// Randomized instances of the density-only oracle.
    pub topk_instances: usize,
    /// Randomized two-cluster clouds for the coverage-only oracle.
    pub pair_instances: usize,
}

impl Default for LandmarkSettings {
    fn default() -> Self {
        Self {
            seed: 42,
            clouds: 100,
            k: 16,
            lambda: DEFAULT_LAMBDA,
            spec: CloudSpec::default(),
            topk_instances: 200,
            pair_instances: 50,
        }
    }
}

/// Density scores for a synthetic cloud from a random two-head query.
fn synthetic_density(cloud: &PointCloud, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let heads = if cloud.dim() % 2 == 0 { 2 } else { 1 };
    let query: Vec<f64> = (0..cloud.dim()).map(|_| rng.sample(StandardNormal)).collect();
    density_scores(&query, cloud, heads)
}

/// Landmark quality: density-only and coverage-only oracles, then hybrid vs
/// random vs density-only selection on clustered clouds.
pub fn bench_landmarks(settings: &LandmarkSettings) -> Result<BenchReport> {
    let started = Instant::now();
    let mut report = BenchReport::new(
        "landmarks",
        &[
            "seed",
            "clusters",
            "hausdorff_hybrid",
            "hausdorff_random",
            "hausdorff_attention",
            "mpr_hybrid",
            "mpr_random",
            "mpr_attention",
        ],
    );
    report
        .param("seed", settings.seed)
        .param("clouds", settings.clouds)
        .param("k", settings.k)
        .param("lambda", settings.lambda)
        .param("cloud_spec", settings.spec);
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);

    // Identical points: every method covers perfectly.
    let flat = PointCloud::new(4, vec![1.5; 4 * 32])?;
    let zeros = vec![0.0; 32];
    let ties = [select_hybrid(&flat, &zeros, 4, settings.lambda)?.order, sample(&mut rng, 32, 4).into_vec()]
        .iter()
        .map(|sel| hausdorff_distance(&flat, &flat.subset(sel)))
        .collect::<Result<Vec<_>>>()?;
    report.verdict(Verdict::new(4, "identical points tie at zero", ties.iter().all(|&h| h == 0.0), format!("{ties:?}")));

    // Density-only selection is the exact top-k.
    let mut exact = 0;
    for _ in 0..settings.topk_instances {
        let l = rng.random_range(1..=64);
        let k = rng.random_range(1..=l);
        let coords: Vec<f64> = (0..l * 8).map(|_| rng.sample(StandardNormal)).collect();
        let cloud = PointCloud::new(8, coords)?;
        let density = synthetic_density(&cloud, &mut rng)?;
        if select_hybrid(&cloud, &density, k, 0.0)?.sorted_indices() == top_k_by_density(&density, k) {
            exact += 1;
        }
    }
    report.verdict(Verdict::new(
        3,
        "lambda=0 equals brute-force top-k",
        exact == settings.topk_instances,
        format!("{exact}/{} instances", settings.topk_instances),
    ));

    // Coverage-only, k=2, against every 2-subset.
    let (mut split, mut equal, mut worst) = (0, 0, 1.0f64);
    for _ in 0..settings.pair_instances {
        let n = rng.random_range(4..=12);
        let (cloud, labels) = two_cluster_cloud(n, &mut rng)?;
        let picked = select_hybrid(&cloud, &vec![0.0; n], 2, 1.0)?.order;
        let ((a, b), h_opt) = optimal_pair(&cloud)?;
        let h_greedy = hausdorff_distance(&cloud, &cloud.subset(&picked))?;
        let truth = label_groups(&labels);
        if voronoi_groups(&cloud, &picked) == truth && voronoi_groups(&cloud, &[a, b]) == truth {
            split += 1;
        }
        if (h_greedy - h_opt).abs() <= 1e-12 * h_opt {
            equal += 1;
        }
        worst = worst.max(h_greedy / h_opt);
    }
    let n = settings.pair_instances;
    report.verdict(Verdict::new(
        3,
        "lambda=1, k=2 Hausdorff equals the exhaustive optimal 2-subset",
        equal == n,
        format!("equal {equal}/{n}; worst greedy/optimal {worst:.3}"),
    ));
    report.note(format!("lambda=1, k=2 puts one landmark in each cluster, like the optimum, in {split}/{n} clouds"));

    // Coverage dominance over random selection.
    let (mut wins, mut coverage_wins, mut mpr_sum, mut mpr_rows) = (0, 0, 0.0, 0);
    for i in 0..settings.clouds {
        let cloud_seed = settings.seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
        let mut crng = ChaCha8Rng::seed_from_u64(cloud_seed);
        let (cloud, labels) = clustered_cloud(&settings.spec, &mut crng)?;
        let density = synthetic_density(&cloud, &mut crng)?;
        let hybrid = select_hybrid(&cloud, &density, settings.k, settings.lambda)?.order;
        let random = sample(&mut crng, cloud.len(), settings.k.min(cloud.len())).into_vec();
        let attention = select_hybrid(&cloud, &density, settings.k, 0.0)?.order;
        let coverage = select_hybrid(&cloud, &density, settings.k, 1.0)?.order;
        if hausdorff_distance(&cloud, &cloud.subset(&coverage))? < hausdorff_distance(&cloud, &cloud.subset(&random))? {
            coverage_wins += 1;
        }
        let h: Vec<f64> = [&hybrid, &random, &attention]
            .iter()
            .map(|sel| hausdorff_distance(&cloud, &cloud.subset(sel)))
            .collect::<Result<_>>()?;
        let m: Vec<Option<f64>> = [&hybrid, &random, &attention]
            .iter()
            .map(|sel| mean_pairwise_reduction(&cloud, &cloud.subset(sel)).ok())
            .collect();
        if h[0] < h[1] {
            wins += 1;
        }
        if let Some(v) = m[0] {
            mpr_sum += v;
            mpr_rows += 1;
        }
        let clusters = labels.iter().max().map_or(0, |m| m + 1);
        report.row(vec![
            json!(cloud_seed),
            json!(clusters),
            json!(h[0]),
            json!(h[1]),
            json!(h[2]),
            json!(m[0]),
            json!(m[1]),
            json!(m[2]),
        ]);
    }
    let needed = (settings.clouds * 9).div_ceil(10);
    report.verdict(Verdict::new(
        4,
        "hybrid beats random on Hausdorff in at least 90% of clouds",
        wins >= needed,
        format!("{wins}/{} clouds", settings.clouds),
    ));
    report.note(format!("coverage-only selection (lambda=1) beats random in {coverage_wins}/{} clouds", settings.clouds));
    if mpr_rows > 0 {
        report.note(format!(
            "mean pairwise reduction of hybrid landmarks averaged {:.1}% (reported only; the 30-60% band came from other data)",
            100.0 * mpr_sum / mpr_rows as f64
        ));
    }
    report.note(format!("elapsed_ms={}", started.elapsed().as_millis()));
    Ok(report)
}

/// Name, prompt, thoughts and their virtual bases.
type NamedCase = (String, Vec<TokenId>, Vec<Vec<TokenId>>, Vec<usize>);

/// Outcome of one injection-equivalence case.
#[derive(Debug, Clone, PartialEq)]
pub struct InjectionCase {
    pub label: String,
    pub prompt_len: usize,
    pub thought_lens: Vec<usize>,
    pub bases: Vec<usize>,
    pub rel_error: f64,
    pub argmax_changed: bool,
}

/// Compares the river's logits after injecting `thoughts` at `bases`
/// against a cache-free recomputation that builds the same sequence inline.
pub fn injection_case(
    weights: &WeightStore,
    prompt: &[TokenId],
    thoughts: &[Vec<TokenId>],
    bases: &[usize],
    next: TokenId,
) -> Result<(f64, bool)> {
    let mut river = River::new(weights.config());
    for &t in prompt {
        river.step(weights, t)?;
    }
    for (i, (thought, &base)) in thoughts.iter().zip(bases).enumerate() {
        river.inject(&encode_thought(weights, thought, base)?, i as u64)?;
    }
    let got = river.step(weights, next)?.logits;

    let mut rows: Vec<Row> = prompt.iter().enumerate().map(|(p, &t)| Row::main(t, p)).collect();
    for (i, (thought, &base)) in thoughts.iter().zip(bases).enumerate() {
        rows.extend(thought.iter().enumerate().map(|(j, &t)| Row::aux(i, t, base + j)));
    }
    rows.push(Row::main(next, prompt.len()));
    let oracle = reference_forward(weights, &rows);
    let expected = oracle.logits.last().expect("rows are non-empty");

    let mut plain = KvCache::new(weights.config());
    let mut plain_logits = Vec::new();
    for (p, &t) in prompt.iter().chain(std::iter::once(&next)).enumerate() {
        plain_logits = crate::model::forward_step(weights, &mut plain, t, p)?.logits;
    }
    let changed = crate::model::argmax(&plain_logits) != crate::model::argmax(&got);
    Ok((relative_error(&got, expected), changed))
}

/// Injection equivalence, empty and rejected injections, and quiescent purity.
pub fn bench_injection(weights: Arc<WeightStore>, seed: u64, random_cases: usize) -> Result<BenchReport> {
    let started = Instant::now();
    let cfg = *weights.config();
    let mut report =
        BenchReport::new("injection", &["case", "prompt_len", "thought_lens", "bases", "rel_error", "argmax_changed"]);
    report.param("seed", seed).param("random_cases", random_cases).param("tolerance", INJECTION_TOLERANCE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reserved = VirtualPositions::new(&cfg).reserved_start();
    let random_tokens = |rng: &mut ChaCha8Rng, n: usize| -> Vec<TokenId> { (0..n).map(|_| rng.random_range(0..256)).collect() };

    // Empty injection: draining nothing at a boundary is invisible.
    let prompt = tokenize(b"Quiet boundary");
    let mut river = River::new(&cfg);
    let mut bare = KvCache::new(&cfg);
    let mut bitwise = true;
    for (p, &t) in prompt.iter().enumerate() {
        let a = river.step(&weights, t)?;
        let b = crate::model::forward_step(&weights, &mut bare, t, p)?;
        bitwise &= a.logits == b.logits;
    }
    bitwise &= *river.cache() == bare;
    report.row(vec![json!("empty"), json!(prompt.len()), json!([]), json!([]), json!(0.0), json!(false)]);
    report.verdict(Verdict::new(5, "empty injection is a bitwise no-op", bitwise, "logits and cache compared"));

    // Gate rejection: nothing reaches the cache.
    let before = river.cache().clone();
    let h = river.last_output().expect("stepped").hidden.clone();
    let opposed: Vec<f32> = h.iter().map(|v| -v).collect();
    let decision = decide(&h, &opposed, 0.5, 0)?;
    if decision.accepted {
        river.inject_thought(&weights, &[1, 2, 3], 0)?;
    }
    let untouched = !decision.accepted && *river.cache() == before;
    report.verdict(Verdict::new(5, "rejected thought leaves the cache bitwise unchanged", untouched, format!("score={:?}", decision.score)));

    // Fixed scenarios, then randomized ones.
    let mut cases: Vec<NamedCase> = vec![
        ("one_token".into(), tokenize(b"Seven plus five is"), vec![vec![b'!' as TokenId]], vec![reserved]),
        ("sixteen_tokens".into(), tokenize(b"Seven plus five is"), vec![tokenize(b"twelve, checked.")], vec![reserved]),
    ];
    for i in 0..random_cases {
        let prompt_len = rng.random_range(1..=24);
        let prompt = random_tokens(&mut rng, prompt_len);
        let count = rng.random_range(1..=2);
        let mut thoughts = Vec::new();
        let mut bases = Vec::new();
        let mut vp = VirtualPositions::with_reserved(&cfg, cfg.max_positions - reserved)?;
        // Random offset into the reserved range, then consecutive allocation.
        vp.allocate(rng.random_range(0..1024))?;
        for _ in 0..count {
            let len = rng.random_range(1..=16);
            thoughts.push(random_tokens(&mut rng, len));
            bases.push(vp.allocate(len)?);
        }
        cases.push((format!("random_{i}"), prompt, thoughts, bases));
    }

    let mut worst = 0.0f64;
    let mut influenced = 0;
    for (label, prompt, thoughts, bases) in &cases {
        let next = rng.random_range(0..256);
        let (err, changed) = injection_case(&weights, prompt, thoughts, bases, next)?;
        worst = worst.max(err);
        influenced += usize::from(changed);
        report.row(vec![
            json!(label),
            json!(prompt.len()),
            json!(thoughts.iter().map(Vec::len).collect::<Vec<_>>()),
            json!(bases),
            json!(err),
            json!(changed),
        ]);
    }
    report.verdict(Verdict::new(
        5,
        "post-injection logits match the inline oracle",
        worst <= INJECTION_TOLERANCE,
        format!("{} cases, max relative error {worst:.3e}", cases.len()),
    ));
    report.note(format!("injection changed the next-token argmax in {influenced}/{} cases", cases.len()));

    // Quiescent purity through the full scheduler.
    let prism = Arc::new(Prism::from_shared(weights.clone()));
    let config = RuntimeConfig { max_new_tokens: 32, ..RuntimeConfig::default() };
    let run = Scheduler::new(prism, config)?.run(b"Quiet river", None)?;
    let bare = generate_bare(&weights, &tokenize(b"Quiet river"), 32)?;
    report.verdict(Verdict::new(
        8,
        "run without triggers equals bare generation",
        run.triggers.is_empty() && run.transcript.generated_tokens == bare,
        format!("{} tokens", bare.len()),
    ));
    report.note(format!("elapsed_ms={}", started.elapsed().as_millis()));
    Ok(report)
}

/// The three scripted demo scenarios.
pub fn demo_scripts() -> Vec<(&'static str, Option<Script>)> {
    let accept = Script {
        river_text: "Twelve apples [TASK: verify 7 + 5 = 12] and then some.".into(),
        thoughts: vec![ScriptedThought { text: "7 + 5 is 12. Correct.".into(), alignment: Alignment::Aligned }],
    };
    let reject = Script {
        river_text: "Twelve apples [TASK: verify 7 + 5 = 12] and then some.".into(),
        thoughts: vec![ScriptedThought { text: "Bananas are blue.".into(), alignment: Alignment::Opposed }],
    };
    vec![("accept", Some(accept)), ("reject", Some(reject)), ("quiet", None)]
}

pub const DEMO_PROMPT: &str = "Q: how many apples? A: ";

/// Runs `scheduler.run` on `prompt`, checking the scenario's expectation.
pub fn demo(
    weights: Arc<WeightStore>,
    config: RuntimeConfig,
    scenario: &str,
    prompt: &str,
    script: Option<&Script>,
) -> Result<(RunOutput, BenchReport)> {
    let prism = Arc::new(Prism::from_shared(weights.clone()));
    let out = Scheduler::new(prism, config)?.run(prompt.as_bytes(), script)?;
    let mut report = BenchReport::new(
        &format!("demo_{scenario}"),
        &["logical_time", "agent_id", "event", "detail"],
    );
    report.param("prompt", prompt).param("runtime", config).param("script", script);
    for e in &out.audit {
        report.row(vec![json!(e.logical_time), json!(e.agent_id), json!(e.kind.as_str()), json!(e.detail)]);
    }
    let injected = out.injections.len();
    match scenario {
        "accept" => report.verdict(Verdict::new(8, "scripted accept injects exactly once", injected == 1, format!("{injected} injections"))),
        "reject" => report.verdict(Verdict::new(8, "scripted reject injects nothing", injected == 0, format!("{injected} injections"))),
        _ if script.is_none() => {
            let bare = generate_bare(&weights, &tokenize(prompt.as_bytes()), config.max_new_tokens)?;
            report.verdict(Verdict::new(
                8,
                "run without triggers equals bare generation",
                out.triggers.is_empty() && out.transcript.generated_tokens == bare,
                format!("{} tokens", bare.len()),
            ));
        }
        _ => {}
    }
    Ok((out, report))
}

/// River cadence alone and with scripted stream agents on worker lanes.
/// Informational: no verdicts.
pub fn bench_throughput(weights: Arc<WeightStore>, agents: usize, tokens: usize) -> Result<BenchReport> {
    let mut report = BenchReport::new("throughput", &["mode", "agents", "river_tokens", "river_ms", "ms_per_token"]);
    report.param("agents", agents).param("tokens", tokens);
    let mut river_text = String::new();
    for i in 0..agents {
        river_text.push_str(&format!("[TASK: check {i}] "));
    }
    let busy = Script {
        river_text,
        thoughts: (0..agents)
            .map(|i| ScriptedThought { text: format!("thought {i} is fine, nothing to add"), alignment: Alignment::Natural })
            .collect(),
    };
    let base = RuntimeConfig {
        max_new_tokens: tokens,
        max_stream_agents: agents.max(1),
        thought_budget: 32,
        single_lane: false,
        ..RuntimeConfig::default()
    };
    let mut per_token = Vec::new();
    // Solo sees the same bytes with the brackets defused, so nothing spawns.
    let solo = Script { river_text: busy.river_text.replace('[', "("), thoughts: vec![] };
    for (mode, script) in [("solo", solo), ("with_streams", busy)] {
        let prism = Arc::new(Prism::from_shared(weights.clone()));
        let out = Scheduler::new(prism, base)?.run(b"Go: ", Some(&script))?;
        let ms = out.river_elapsed.as_secs_f64() * 1e3;
        per_token.push(ms / tokens as f64);
        report.row(vec![json!(mode), json!(out.agents().len()), json!(tokens), json!(ms), json!(ms / tokens as f64)]);
    }
    report.note(format!(
        "river cadence slowdown with streams: {:.1}% on {} hardware threads (informational)",
        100.0 * (per_token[1] / per_token[0] - 1.0),
        std::thread::available_parallelism().map_or(1, |n| n.get())
    ));
    Ok(report)
}
