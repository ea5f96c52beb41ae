use std::cmp::Ordering;

use hnstrat::convexgeo::Vector;
use hnstrat::hntheta::{
    self, direct_sum_hn_traced, gamma_of_destabilizing, hn_type, perturbed_hm,
    stabilization_threshold, theta_semistable, Filtration, Mode, SubProfile, DEFAULT_ATOM_CAP,
};
use hnstrat::quotmodel::{
    beta_of_tau, central_character_multiple, graded_limit_weight, hm_function,
    verify_minimizer_at, BetaTau,
};
use hnstrat::schema::{
    poly_json, rats, vector_json, PairFile, ProfileFile, QuotFile, TauFile, WeightsFile,
};
use hnstrat::strata::{
    certified_perturbation, check_refinement, epsilon_bounds, index_set, p_beta_retraction,
    torus_stratum, y_membership, z_membership, EpsilonOptions, Extended, SupportPoint,
    DEFAULT_INDEX_CAP,
};
use hnstrat::{parse_scalar, Error, RatVector, Rational, Scalar, ThetaParam, WeightSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::{ModeArg, Verb};

pub const DEFAULT_SAMPLES: usize = 200;
const THRESHOLD_SCAN: i64 = 4096;

pub enum CliError {
    /// Unreadable or malformed input, or a missing flag.
    Usage(String),
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

type Out = Result<Value, CliError>;

pub struct Options {
    pub seed: Option<u64>,
    pub n: Option<i64>,
    pub m: Option<i64>,
    pub cap: Option<usize>,
    pub mode: ModeArg,
    pub epsilon: Option<String>,
}

impl Options {
    fn n(&self) -> Result<i64, CliError> {
        self.n.ok_or_else(|| CliError::Usage("--n is required".into()))
    }

    fn m(&self) -> Result<i64, CliError> {
        self.m.ok_or_else(|| CliError::Usage("--m is required".into()))
    }

    fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Usage("--seed is required for sampling".into()))
    }

    fn epsilon(&self) -> Result<Rational, CliError> {
        let s = self
            .epsilon
            .as_deref()
            .ok_or_else(|| CliError::Usage("--epsilon is required".into()))?;
        parse_scalar(s).ok_or_else(|| CliError::Usage(format!("--epsilon {s:?} is not a rational")))
    }
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid input: {e}")))
}

fn missing(field: &str) -> CliError {
    CliError::Usage(format!("input lacks \"{field}\""))
}

fn q(r: &Rational) -> Value {
    Value::String(r.to_string())
}

fn qs(v: &[Rational]) -> Value {
    json!(rats(v))
}

fn vecj(v: &RatVector) -> Value {
    json!(vector_json(v))
}

fn ext(e: &Extended<Rational>) -> Value {
    match e {
        Extended::Finite(v) => q(v),
        Extended::Infinite => Value::String("inf".into()),
    }
}

fn report(verb: Verb, anchor: &str, result: Value, checks: Value) -> Value {
    let name = clap::ValueEnum::to_possible_value(&verb)
        .map(|p| p.get_name().to_string())
        .unwrap_or_default();
    json!({
        "command": name,
        "anchor": anchor,
        "result": result,
        "checks": checks,
    })
}

pub fn run(verb: Verb, text: &str, o: &Options) -> Out {
    match verb {
        Verb::IndexSet => cmd_index_set(text, o),
        Verb::Stratum => cmd_stratum(text),
        Verb::ZMember | Verb::YMember => cmd_member(verb, text, o),
        Verb::Retract => cmd_retract(text),
        Verb::Epsilon => cmd_epsilon(text, o),
        Verb::RefineCheck => cmd_refine(text, o),
        Verb::Hm => cmd_hm(text, o),
        Verb::BetaTau => cmd_beta_tau(text, o),
        Verb::VerifyMin => cmd_verify_min(text, o),
        Verb::CharIdentity => cmd_char_identity(text, o),
        Verb::GradedWeight => cmd_graded_weight(text, o),
        Verb::HnSum => cmd_hn_sum(text),
        Verb::ThetaCheck => cmd_theta_check(text, o),
        Verb::Cross => cmd_cross(text, o),
        Verb::PerturbedHm => cmd_perturbed_hm(text, o),
        Verb::Gamma => cmd_gamma(text, o),
        Verb::SEquiv => cmd_s_equiv(text),
    }
}

fn weights(text: &str) -> Result<(WeightsFile, WeightSystem), CliError> {
    let f: WeightsFile = parse(text)?;
    let ws = f.system()?;
    Ok((f, ws))
}

fn cmd_index_set(text: &str, o: &Options) -> Out {
    let (_, ws) = weights(text)?;
    let b = index_set(&ws, o.cap.unwrap_or(DEFAULT_INDEX_CAP))?;
    let witnesses: Vec<Value> = b
        .witnesses
        .iter()
        .map(|(beta, s)| json!({ "index": vecj(beta), "subset": s }))
        .collect();
    let dominant = b.indices.iter().all(|v| ws.weyl_rep(v) == *v);
    Ok(report(
        Verb::IndexSet,
        "B = { Weyl representative of the nearest point to 0 of conv{alpha_i : i in S} : S nonempty }",
        json!({
            "indices": b.indices.iter().map(vecj).collect::<Vec<_>>(),
            "size": b.len(),
            "witnesses": witnesses,
        }),
        json!({ "indices_in_chamber": dominant, "contains_zero": b.contains_zero() }),
    ))
}

fn supports(ws: &WeightSystem, given: Option<SupportPoint>) -> Result<Vec<SupportPoint>, CliError> {
    match given {
        Some(s) => Ok(vec![s]),
        None => {
            if ws.len() > DEFAULT_INDEX_CAP {
                return Err(Error::Capacity {
                    size: ws.len(),
                    cap: DEFAULT_INDEX_CAP,
                }
                .into());
            }
            Ok(SupportPoint::all(ws.len()).collect())
        }
    }
}

fn cmd_stratum(text: &str) -> Out {
    let (f, ws) = weights(text)?;
    let mut rows = Vec::new();
    let mut consistent = true;
    for s in supports(&ws, f.support()?)? {
        let beta = torus_stratum(&ws, &s)?;
        consistent &= y_membership(&ws, &beta, &s)?;
        rows.push(json!({
            "support": s.indices(),
            "beta": vecj(&beta),
            "index": vecj(&ws.weyl_rep(&beta)),
        }));
    }
    Ok(report(
        Verb::Stratum,
        "beta(x) = nearest point to 0 of conv{alpha_i : x_i != 0} (maximal torus)",
        json!({ "strata": rows }),
        json!({ "support_in_own_y_beta": consistent }),
    ))
}

fn cmd_member(verb: Verb, text: &str, o: &Options) -> Out {
    let (f, ws) = weights(text)?;
    let betas: Vec<RatVector> = match f.beta()? {
        Some(b) => vec![b],
        None => index_set(&ws, o.cap.unwrap_or(DEFAULT_INDEX_CAP))?.indices,
    };
    let sup = supports(&ws, f.support()?)?;
    let z = verb == Verb::ZMember;
    let mut table = Vec::new();
    let mut nested = true;
    for beta in &betas {
        let mut rows = Vec::new();
        let mut members = Vec::new();
        for s in &sup {
            let in_z = z_membership(&ws, beta, s)?;
            let in_y = y_membership(&ws, beta, s)?;
            nested &= !in_z || in_y;
            let hit = if z { in_z } else { in_y };
            if hit {
                members.push(s.indices().to_vec());
            }
            rows.push(json!({ "support": s.indices(), "member": hit }));
        }
        table.push(json!({ "beta": vecj(beta), "members": members, "rows": rows }));
    }
    let anchor = if z {
        "Z_beta = { x : x_i = 0 unless alpha_i . beta = |beta|^2 }"
    } else {
        "Y_beta = { x : x_i = 0 if alpha_i . beta < |beta|^2, x_i != 0 for some alpha_i . beta = |beta|^2 }"
    };
    Ok(report(
        verb,
        anchor,
        json!({ "table": table }),
        json!({ "z_subset_of_y": nested }),
    ))
}

fn cmd_retract(text: &str) -> Out {
    let (f, ws) = weights(text)?;
    let beta = f.beta()?.ok_or_else(|| missing("beta"))?;
    let s = f.support()?.ok_or_else(|| missing("support"))?;
    let r = p_beta_retraction(&ws, &beta, &s)?;
    let in_z = z_membership(&ws, &beta, &r)?;
    Ok(report(
        Verb::Retract,
        "p_beta : Y_beta -> Z_beta sets x_i = 0 whenever alpha_i . beta != |beta|^2",
        json!({ "support": s.indices(), "beta": vecj(&beta), "image": r.indices() }),
        json!({ "image_in_z_beta": in_z }),
    ))
}

fn epsilon_opts(o: &Options) -> EpsilonOptions<Rational> {
    EpsilonOptions {
        cap: o.cap.unwrap_or(DEFAULT_INDEX_CAP),
        ..EpsilonOptions::default()
    }
}

fn cmd_epsilon(text: &str, o: &Options) -> Out {
    let (_, ws) = weights(text)?;
    let eb = epsilon_bounds(&ws, &epsilon_opts(o))?;
    let positive = eb.epsilon > Rational::from_i64(0);
    Ok(report(
        Verb::Epsilon,
        "epsilon = min{1, epsilon_0/(4M+1), epsilon_1/3}",
        json!({
            "epsilon0": ext(&eb.epsilon0),
            "epsilon1": ext(&eb.epsilon1),
            "epsilon1_exact": eb.epsilon1_exact,
            "M": q(&eb.m_bound),
            "M_exact": eb.m_exact,
            "epsilon": q(&eb.epsilon),
            "indices": eb.indices.indices.iter().map(vecj).collect::<Vec<_>>(),
        }),
        json!({ "epsilon_positive": positive }),
    ))
}

fn random_directions(ws: &WeightSystem, seed: u64) -> Vec<RatVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..ws.len())
        .map(|_| {
            Vector::new(
                (0..ws.dim())
                    .map(|_| Rational::from_i64(rng.gen_range(-5..=5)))
                    .collect(),
            )
        })
        .collect()
}

fn cmd_refine(text: &str, o: &Options) -> Out {
    let (f, ws) = weights(text)?;
    let opts = epsilon_opts(o);
    let (per, sampled) = match f.perturbed_system()? {
        Some(p) => (p, false),
        None => {
            let dirs = random_directions(&ws, o.seed()?);
            (certified_perturbation(&ws, &dirs, &opts)?, true)
        }
    };
    let r = check_refinement(&ws, &per, &opts)?;
    let corr: Vec<Value> = r
        .correspondence
        .iter()
        .map(|c| {
            json!({
                "gamma": vecj(&c.gamma),
                "far_side": c.far_side,
                "beta_gamma": vecj(&c.beta_gamma),
                "distance_sq": q(&c.distance_sq),
            })
        })
        .collect();
    Ok(report(
        Verb::RefineCheck,
        "S_gamma^per is contained in S_beta_gamma, beta_gamma = nearest point of conv{alpha_i : alpha_i^per . gamma >= |gamma|^2}",
        json!({
            "holds": r.holds,
            "sampled": sampled,
            "perturbed": per.weights().iter().map(vecj).collect::<Vec<_>>(),
            "epsilon": q(&r.bounds.epsilon),
            "perturbation_sq": q(&r.perturbation_sq),
            "supports_checked": r.rows.len(),
            "correspondence": corr,
            "violations": r.violations,
        }),
        json!({ "certified": true, "identity": r.is_identity() }),
    ))
}

fn cmd_hm(text: &str, o: &Options) -> Out {
    let f: QuotFile = parse(text)?;
    let rho = f.point()?;
    let v = hm_function(&rho, o.m()?)?;
    Ok(report(
        Verb::Hm,
        "mu(rho, lambda) = sum_{i<s} (k_i - k_{i+1}) (P(F^(i), m) - dim V^(i) P(F, m)/P(F, n))",
        json!({ "mu": q(&v.telescoped), "graded_form": q(&v.graded) }),
        json!({ "forms_agree": v.telescoped == v.graded }),
    ))
}

fn beta_tau(text: &str, o: &Options) -> Result<(TauFile, BetaTau<Rational>), CliError> {
    let f: TauFile = parse(text)?;
    let bt = beta_of_tau(&f.tau()?, o.n()?, o.m()?)?;
    Ok((f, bt))
}

fn cmd_beta_tau(text: &str, o: &Options) -> Out {
    let (_, bt) = beta_tau(text, o)?;
    let c = bt.checks();
    Ok(report(
        Verb::BetaTau,
        "beta_i = P(m)/P(n) - P_i(m)/P_i(n), repeated P_i(n) times",
        json!({
            "beta": qs(&bt.beta),
            "block_sizes": qs(&bt.block_sizes),
            "norm_sq": q(&bt.norm_sq),
            "norm_sq_alt": q(&bt.norm_sq_alt()),
            "diagnostics": c.diagnostics,
        }),
        json!({
            "formula": c.formula,
            "trace_free": c.trace_free,
            "strictly_decreasing": c.strictly_decreasing,
            "norm_forms_agree": c.norm_forms_agree,
            "sign_pattern": c.sign_pattern,
        }),
    ))
}

fn cmd_verify_min(text: &str, o: &Options) -> Out {
    let (f, bt) = beta_tau(text, o)?;
    let seed = o.seed()?;
    let samples = f.samples.unwrap_or(DEFAULT_SAMPLES);
    let point = f.point().unwrap_or_else(|| bt.beta.clone());
    let ok = verify_minimizer_at(&bt.tau, bt.n, bt.m, &point, samples, seed)?;
    Ok(report(
        Verb::VerifyMin,
        "f(x) = sum_{i<s} (x_i - x_{i+1}) (P(F^(i), m) - P(F^(i), n) P(m)/P(n)) / (sum x_i^2 P_i(n))^(1/2) subject to sum x_i P_i(n) = 0",
        json!({
            "point": qs(&point),
            "samples": samples,
            "seed": seed,
            "minimal": ok,
        }),
        json!({ "point_is_beta": point == bt.beta }),
    ))
}

fn cmd_char_identity(text: &str, o: &Options) -> Out {
    let (_, bt) = beta_tau(text, o)?;
    let c = central_character_multiple(&bt);
    let exponents: Vec<Rational> = bt.tau.polys().iter().map(|p| p.eval_int(bt.m)).collect();
    let shifted: Vec<Rational> = bt
        .beta
        .iter()
        .zip(&bt.block_sizes)
        .map(|(b, s)| -(b.clone() * s.clone()))
        .collect();
    Ok(report(
        Verb::CharIdentity,
        "prod t_i^{P_i(m)} = prod t_i^{-beta_i P_i(n)} on prod t_i^{P_i(n)} = 1",
        json!({
            "exponents": qs(&exponents),
            "beta_exponents": qs(&shifted),
            "multiple": c.as_ref().map(q),
        }),
        json!({ "identity": c.is_some() }),
    ))
}

fn cmd_graded_weight(text: &str, o: &Options) -> Out {
    let (_, bt) = beta_tau(text, o)?;
    let w = graded_limit_weight(&bt)?;
    Ok(report(
        Verb::GradedWeight,
        "-mu(rho_bar, lambda_beta) = sum P_i(m)^2/P_i(n) - P(m)^2/P(n) = |beta|^2",
        json!({ "weight": q(&w), "norm_sq": q(&bt.norm_sq) }),
        json!({ "equals_norm_sq": w == bt.norm_sq }),
    ))
}

fn cmd_hn_sum(text: &str) -> Out {
    let f: PairFile = parse(text)?;
    let (a, b) = (f.a.profile()?, f.b.profile()?);
    let (sum, trace) = direct_sum_hn_traced(&a, &b)?;
    let atoms = a.atom_count() + b.atom_count() == sum.atom_count();
    Ok(report(
        Verb::HnSum,
        "(E + F)^(1) = E^(1), F^(1) or E^(1) + F^(1) as P(E^(1)) r(F^(1)) is >, < or = P(F^(1)) r(E^(1))",
        json!({
            "sum": ProfileFile::from_profile(&sum),
            "type": hn_type(&sum).polys().iter().map(poly_json).collect::<Vec<_>>(),
            "cases": trace,
        }),
        json!({ "atoms_preserved": atoms }),
    ))
}

fn profile_theta(
    text: &str,
    o: &Options,
) -> Result<(ProfileFile, hnstrat::SheafProfile, ThetaParam), CliError> {
    let f: ProfileFile = parse(text)?;
    let p = f.profile()?;
    let theta = f.theta().ok_or_else(|| missing("theta"))?;
    let tp = ThetaParam::new(theta, o.n()?, &hn_type(&p))?;
    Ok((f, p, tp))
}

fn sub_json(s: &SubProfile<Rational>) -> Value {
    json!({
        "selection": s.selection,
        "layer_polys": s.layer_polys.iter().map(poly_json).collect::<Vec<_>>(),
    })
}

fn cmd_theta_check(text: &str, o: &Options) -> Out {
    let (_, p, tp) = profile_theta(text, o)?;
    let mode = match o.mode {
        ModeArg::Asymptotic => Mode::Asymptotic,
        ModeArg::AtN => Mode::AtN,
    };
    let cap = o.cap.unwrap_or(DEFAULT_ATOM_CAP);
    let r = theta_semistable(&p, &tp, mode, cap)?;
    let threshold = stabilization_threshold(&p, &tp.theta, cap, THRESHOLD_SCAN)
        .ok()
        .map(|s| json!({ "asymptotic": s.asymptotic, "stable_from": s.stable_from }));
    Ok(report(
        Verb::ThetaCheck,
        "semistable iff sum theta_i P(F'_i)/P(F') >= sum theta_i P(F_i)/P(F) for all proper compatible F'; GIT form sum beta'_i P(F'_i, n) >= 0",
        json!({
            "verdict": r.verdict,
            "mode": mode,
            "witness": r.witness.as_ref().map(sub_json),
            "subprofiles": r.subprofiles,
            "beta_prime": qs(&tp.beta_prime),
            "threshold": threshold,
        }),
        json!({
            "git_agreements": r.git_agreements,
            "git_disagreements": r.git_disagreements,
            "beta_prime_trace_zero": tp.beta_prime_trace() == Rational::from_i64(0),
        }),
    ))
}

fn cmd_cross(text: &str, o: &Options) -> Out {
    let f: TauFile = parse(text)?;
    let tau = f.tau()?;
    let theta = f.theta().ok_or_else(|| missing("theta"))?;
    let tp = ThetaParam::new(theta, o.n()?, &tau)?;
    let m = o.m()?;
    let holds = hntheta::cross_condition(&tp, &tau, m)?;
    Ok(report(
        Verb::Cross,
        "(sum theta_i P_i(n))/P(n) >= (sum theta_i P_i(m))/P(m); otherwise no theta-semistable sheaf has type tau",
        json!({ "holds": holds }),
        json!({}),
    ))
}

fn filtration(f: &ProfileFile) -> Result<Filtration, CliError> {
    Ok(Filtration {
        blocks: f.blocks.clone().ok_or_else(|| missing("blocks"))?,
        weights: f.weights.clone().ok_or_else(|| missing("weights"))?,
    })
}

fn cmd_perturbed_hm(text: &str, o: &Options) -> Out {
    let (f, p, tp) = profile_theta(text, o)?;
    let eps = o.epsilon()?;
    let filt = filtration(&f)?;
    let mu = perturbed_hm(&p, &filt, &tp, &eps)?;
    let doubled = perturbed_hm(&p, &filt, &tp, &(eps.clone() * Rational::from_i64(2)))?;
    Ok(report(
        Verb::PerturbedHm,
        "mu^per(rho, lambda) = epsilon sum_j sum_i k_j beta'_i P(F_i^j, n)",
        json!({ "mu": q(&mu), "over_epsilon": q(&(mu.clone() / eps)) }),
        json!({ "linear_in_epsilon": doubled == mu * Rational::from_i64(2) }),
    ))
}

fn cmd_gamma(text: &str, o: &Options) -> Out {
    let (f, p, tp) = profile_theta(text, o)?;
    let eps = o.epsilon()?;
    let blocks = f.blocks.clone().ok_or_else(|| missing("blocks"))?;
    let g = gamma_of_destabilizing(&p, &blocks, &tp, &eps)?;
    let decreasing = g.gamma.windows(2).all(|w| w[0].cmp(&w[1]) == Ordering::Greater);
    Ok(report(
        Verb::Gamma,
        "gamma_j = -epsilon sum_i beta'_i P(F_i^j, n) / P(F^j, n), normalised so mu^per(rho, lambda_gamma) = -|gamma|^2",
        json!({
            "gamma": qs(&g.gamma),
            "block_dims": qs(&g.block_dims),
            "denominator": q(&g.denominator),
            "hm_at_cleared": q(&g.hm_at_cleared),
            "norm_sq": q(&g.norm_sq),
        }),
        json!({
            "strictly_decreasing": decreasing,
            "trace_free": g.trace_free,
            "normalized": g.normalized,
        }),
    ))
}

fn cmd_s_equiv(text: &str) -> Out {
    let f: PairFile = parse(text)?;
    let (a, b) = (f.a.profile()?, f.b.profile()?);
    let eq = hntheta::s_equivalent(&a, &b, f.strict);
    Ok(report(
        Verb::SEquiv,
        "S-equivalent iff the graded objects agree layer by layer as multisets of stable atoms",
        json!({ "equivalent": eq, "strict": f.strict }),
        json!({ "same_type": hn_type(&a) == hn_type(&b) }),
    ))
}
