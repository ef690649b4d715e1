//! `dman`: batch front end over JSON inputs.
//!
//! Reports go to stdout as JSON, timing to stderr. Exit status is 0 when the
//! verdict holds, 1 when it fails (the report carries a witness), and 2 on
//! malformed input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use dman_core::atlas::{atlas_completion, compose_atlases, subordinate, AtlasFailure, ComposedAtlas};
use dman_core::io::{
    self, AtlasJson, ContinuousMapJson, CoverJson, CospanJson, HypercoverJson, PointJson, PresheafJson,
    PresheafMapJson, SieveMapJson,
};
use dman_core::lattice::FiniteSpace;
use dman_core::qsmooth::hochschild::{hochschild_level, koszul_betti};
use dman_core::qsmooth::linalg::parse_rational;
use dman_core::qsmooth::model::hochschild_model;
use dman_core::qsmooth::{
    is_transverse, mapping_space_betti, nerve_cosimplicial_betti, pl_retraction_check, tangent_complex,
    virtual_dimension, CospanPresentation, RationalPoint,
};
use dman_core::sheaf::{
    descent_report, hypercover_descent_check, local_isomorphism_failure, sheaf_failure, sheafify, is_local_wrt,
};
use dman_core::simplicial::{atlas_to_hypercover, hypercover_to_atlas, HypercoverFailure};
use dman_core::sweep::{self, SweepBounds, SUITES};
use dman_core::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "dman", version, about = "Atlases, hypercovers, descent and quasi-smooth intersections on finite data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Simplicial truncation level.
    #[arg(long, global = true, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=5))]
    trunc: u64,
    /// Jet order.
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=8))]
    jet: u32,
    /// Cosimplicial levels; Betti numbers are reported below the top level.
    #[arg(long, global = true, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..=6))]
    levels: u64,
    /// Dimension m of the target vector space.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=8))]
    target: u64,
    /// Corpus seed.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=256))]
    jobs: Option<u64>,
    /// Also write the witness of a false verdict to this file.
    #[arg(long, global = true)]
    witness_out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cover and meet forms of the atlas condition.
    CheckAtlas { atlas: PathBuf },
    /// Whether the atlas also generates every open.
    CheckSite { atlas: PathBuf },
    /// Closes a cover under intersections into an atlas.
    CompleteCover { cover: PathBuf },
    /// Pulls an atlas back along a continuous map.
    PullbackAtlas {
        atlas: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
    /// Composes an atlas with a sieve-valued map.
    ComposeAtlas {
        atlas: PathBuf,
        #[arg(long)]
        sieves: PathBuf,
    },
    /// Subordinates a site to an atlas of the same space.
    Subordinate { site: PathBuf, atlas: PathBuf },
    /// The hypercover of an atlas, truncated at `--trunc`.
    AtlasToHypercover { atlas: PathBuf },
    /// The covering condition up to `--trunc`.
    CheckHypercover { hypercover: PathBuf },
    /// Reads a hypercover back as a diagram of opens.
    HypercoverToAtlas { hypercover: PathBuf },
    /// The sheaf condition, optionally with descent along given covers.
    SheafCheck {
        presheaf: PathBuf,
        #[arg(long)]
        atlas: Option<PathBuf>,
        #[arg(long)]
        hypercover: Option<PathBuf>,
    },
    Sheafify { presheaf: PathBuf },
    /// Whether a presheaf map is a local isomorphism, and optionally whether
    /// a presheaf is local with respect to it.
    LocalIso {
        map: PathBuf,
        #[arg(long)]
        presheaf: Option<PathBuf>,
    },
    Vdim { cospan: PathBuf },
    Tangent {
        cospan: PathBuf,
        #[arg(long)]
        point: Option<PathBuf>,
    },
    Transverse {
        cospan: PathBuf,
        #[arg(long)]
        point: Option<PathBuf>,
    },
    /// Variable layout of the Hochschild levels and their identity checks.
    Hochschild { cospan: PathBuf },
    /// Betti numbers of the jet model of the mapping space.
    Betti {
        cospan: PathBuf,
        #[arg(long)]
        point: Option<PathBuf>,
    },
    /// Betti numbers of the jet model over the nerve of the cospan category.
    NerveBetti {
        cospan: PathBuf,
        #[arg(long)]
        point: Option<PathBuf>,
    },
    /// Betti numbers of the Koszul complex of a point cut out by `codim` equations.
    Koszul {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(0..=16))]
        codim: u64,
    },
    /// Retraction identities, continuity and a derivative witness on a rational grid.
    PlCheck {
        #[arg(long, default_value = "1")]
        bound: String,
    },
    /// Runs an exhaustive or seeded property suite.
    Sweep {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long, default_value_t = 3)]
        points: usize,
        #[arg(long, default_value_t = 3)]
        poset: usize,
        #[arg(long, default_value_t = 50)]
        corpus: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CheckAtlas { .. } => "check-atlas",
            Command::CheckSite { .. } => "check-site",
            Command::CompleteCover { .. } => "complete-cover",
            Command::PullbackAtlas { .. } => "pullback-atlas",
            Command::ComposeAtlas { .. } => "compose-atlas",
            Command::Subordinate { .. } => "subordinate",
            Command::AtlasToHypercover { .. } => "atlas-to-hypercover",
            Command::CheckHypercover { .. } => "check-hypercover",
            Command::HypercoverToAtlas { .. } => "hypercover-to-atlas",
            Command::SheafCheck { .. } => "sheaf-check",
            Command::Sheafify { .. } => "sheafify",
            Command::LocalIso { .. } => "local-iso",
            Command::Vdim { .. } => "vdim",
            Command::Tangent { .. } => "tangent",
            Command::Transverse { .. } => "transverse",
            Command::Hochschild { .. } => "hochschild",
            Command::Betti { .. } => "betti",
            Command::NerveBetti { .. } => "nerve-betti",
            Command::Koszul { .. } => "koszul",
            Command::PlCheck { .. } => "pl-check",
            Command::Sweep { .. } => "sweep",
        }
    }
}

/// A report, its verdict, and for false verdicts a replayable witness.
struct Outcome {
    report: Value,
    verdict: bool,
    witness: Option<Value>,
}

fn success(report: Value) -> Outcome {
    Outcome {
        report,
        verdict: true,
        witness: None,
    }
}

fn verdict(report: Value, holds: bool, witness: impl FnOnce() -> Value) -> Outcome {
    Outcome {
        report,
        verdict: holds,
        witness: (!holds).then(witness),
    }
}

fn read<T: io::DeserializeOwned>(path: &Path) -> Result<T> {
    io::from_file(path)
}

fn read_atlas(path: &Path) -> Result<(AtlasJson, dman_core::atlas::AtlasDiagram)> {
    let j: AtlasJson = read(path)?;
    let u = j.to_model()?;
    Ok((j, u))
}

fn read_point(c: &CospanPresentation, path: Option<&Path>) -> Result<RationalPoint> {
    match path {
        Some(p) => read::<PointJson>(p)?.to_model(c),
        None => RationalPoint::origin(c),
    }
}

fn open_id(space: &FiniteSpace, s: dman_core::lattice::PointSet) -> String {
    space.open_id(s)
}

fn atlas_failure(u: &dman_core::atlas::AtlasDiagram, f: &AtlasFailure) -> Value {
    let space = u.space();
    match f {
        AtlasFailure::NotCovering { missing } => json!({"kind": "not_covering", "missing": space.labels_of(*missing)}),
        AtlasFailure::Intersection { i, j, missing } => json!({
            "kind": "intersection",
            "i": u.index().label(*i),
            "j": u.index().label(*j),
            "missing": space.labels_of(*missing),
        }),
    }
}

fn composed_report(c: &ComposedAtlas) -> Value {
    let idx = c.diagram.index();
    json!({
        "atlas": AtlasJson::from_model(&c.diagram),
        "is_atlas": c.diagram.is_atlas(),
        "is_site": c.diagram.is_site(),
        "witnesses": (0..idx.len()).map(|k| (idx.label(k).to_string(), c.witness(k))).collect::<std::collections::BTreeMap<_, _>>(),
    })
}

/// Precondition failures of a composition are a false verdict, not bad input.
fn composition(result: Result<ComposedAtlas>, inputs: Value) -> Result<Outcome> {
    match result {
        Ok(c) => {
            let ok = c.diagram.is_atlas();
            let report = composed_report(&c);
            Ok(verdict(report.clone(), ok, || json!({"inputs": inputs, "result": report})))
        }
        Err(Error::Precondition(why)) => Ok(verdict(json!({"composed": false, "reason": why}), false, || {
            json!({"inputs": inputs, "reason": why})
        })),
        Err(e) => Err(e),
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let trunc = cli.trunc as usize;
    let levels = cli.levels as usize;
    let m = cli.target as usize;
    match &cli.command {
        Command::CheckAtlas { atlas } => {
            let (j, u) = read_atlas(atlas)?;
            let failure = u.cover_condition_failure();
            let meet = u.is_atlas_meet_condition_default()?;
            let cover = failure.is_none();
            let report = json!({
                "atlas": cover && meet,
                "cover_condition": cover,
                "meet_condition": meet,
                "failure": failure.as_ref().map(|f| atlas_failure(&u, f)),
            });
            Ok(verdict(report.clone(), cover && meet, || json!({"input": j, "report": report})))
        }
        Command::CheckSite { atlas } => {
            let (j, u) = read_atlas(atlas)?;
            let gap = u.site_gap();
            let report = json!({
                "site": u.is_site(),
                "atlas": u.is_atlas(),
                "gap": gap.map(|g| open_id(u.space(), g)),
            });
            Ok(verdict(report.clone(), u.is_site(), || json!({"input": j, "report": report})))
        }
        Command::CompleteCover { cover } => {
            let (space, opens) = read::<CoverJson>(cover)?.to_model()?;
            let u = atlas_completion(&space, &opens)?;
            Ok(success(json!({"atlas": AtlasJson::from_model(&u), "is_atlas": u.is_atlas()})))
        }
        Command::PullbackAtlas { atlas, map } => {
            let (j, u) = read_atlas(atlas)?;
            let fj: ContinuousMapJson = read(map)?;
            let p = u.pullback(&fj.to_model()?)?;
            let ok = p.diagram.is_atlas();
            let report = json!({
                "atlas": AtlasJson::from_model(&p.diagram),
                "is_atlas": ok,
                "input_was_atlas": p.input_was_atlas,
            });
            Ok(verdict(report.clone(), ok, || json!({"inputs": {"atlas": j, "map": fj}, "report": report})))
        }
        Command::ComposeAtlas { atlas, sieves } => {
            let (j, u) = read_atlas(atlas)?;
            let sj: SieveMapJson = read(sieves)?;
            let eta = sj.to_model(u.index())?;
            composition(compose_atlases(&u, &eta), json!({"atlas": j, "sieves": sj}))
        }
        Command::Subordinate { site, atlas } => {
            let (sj, s) = read_atlas(site)?;
            let (aj, a) = read_atlas(atlas)?;
            composition(subordinate(&s, &a), json!({"site": sj, "atlas": aj}))
        }
        Command::AtlasToHypercover { atlas } => {
            let (_, u) = read_atlas(atlas)?;
            let h = atlas_to_hypercover(&u, trunc)?;
            Ok(success(serde_json::to_value(HypercoverJson::from_model(&h))?))
        }
        Command::CheckHypercover { hypercover } => {
            let j: HypercoverJson = read(hypercover)?;
            let h = j.to_model()?;
            let up_to = trunc.min(h.truncation());
            let failure = h.hypercover_failure(up_to)?;
            let space = h.space();
            let described = failure.as_ref().map(|f| match f {
                HypercoverFailure::NotCovering { missing } => json!({"kind": "not_covering", "missing": space.labels_of(*missing)}),
                HypercoverFailure::Sphere { sphere, missing } => json!({
                    "kind": "sphere",
                    "dim": sphere.dim,
                    "facets": sphere.facets.iter().map(|&s| h.shape().id(sphere.dim - 1, s).to_string()).collect::<Vec<_>>(),
                    "missing": space.labels_of(*missing),
                }),
            });
            let report = json!({"hypercover": failure.is_none(), "checked_up_to": up_to, "failure": described});
            Ok(verdict(report.clone(), failure.is_none(), || json!({"input": j, "report": report})))
        }
        Command::HypercoverToAtlas { hypercover } => {
            let j: HypercoverJson = read(hypercover)?;
            let r = hypercover_to_atlas(&j.to_model()?)?;
            let report = json!({
                "verdict": r.verdict(),
                "atlas_verdict": r.atlas_verdict,
                "joins_verdict": r.joins_verdict,
                "horizon": r.horizon,
                "class_dims": r.class_dims,
                "diagram": r.diagram.as_ref().map(AtlasJson::from_model),
                "failure": r.failure,
            });
            Ok(verdict(report.clone(), r.verdict(), || json!({"input": j, "report": report})))
        }
        Command::SheafCheck { presheaf, atlas, hypercover } => {
            let pj: PresheafJson = read(presheaf)?;
            let f = pj.to_model()?;
            let failure = sheaf_failure(&f);
            let mut ok = failure.is_none();
            let mut report = json!({
                "sheaf": failure.is_none(),
                "failure_open": failure.map(|u| open_id(f.space(), f.space().opens()[u])),
            });
            let mut inputs = json!({"presheaf": pj});
            if let Some(path) = atlas {
                let (aj, u) = read_atlas(path)?;
                let r = descent_report(&f, &u)?;
                ok &= r.bijective();
                report["atlas_descent"] = json!({
                    "descent": r.bijective(),
                    "sections": r.sections,
                    "families": r.families,
                    "injective": r.injective,
                    "surjective": r.surjective,
                });
                inputs["atlas"] = serde_json::to_value(aj)?;
            }
            if let Some(path) = hypercover {
                let hj: HypercoverJson = read(path)?;
                let d = hypercover_descent_check(&f, &hj.to_model()?)?;
                ok &= d;
                report["hypercover_descent"] = json!(d);
                inputs["hypercover"] = serde_json::to_value(hj)?;
            }
            Ok(verdict(report.clone(), ok, || json!({"inputs": inputs, "report": report})))
        }
        Command::Sheafify { presheaf } => {
            let f = read::<PresheafJson>(presheaf)?.to_model()?;
            let s = sheafify(&f)?;
            Ok(success(json!({
                "sheaf": PresheafJson::from_model(&s.sheaf),
                "rounds": s.rounds,
                "unit": PresheafMapJson::from_model(&s.unit).components,
            })))
        }
        Command::LocalIso { map, presheaf } => {
            let mj: PresheafMapJson = read(map)?;
            let psi = mj.to_model()?;
            let failure = local_isomorphism_failure(&psi)?;
            let space = psi.source().space();
            let mut ok = failure.is_none();
            let mut report = json!({
                "local_isomorphism": failure.is_none(),
                "failure": failure.as_ref().map(|f| json!({"open": open_id(space, space.opens()[f.open]), "section": f.section})),
            });
            let mut inputs = json!({"map": mj});
            if let Some(path) = presheaf {
                let pj: PresheafJson = read(path)?;
                let local = is_local_wrt(&pj.to_model()?, &psi)?;
                ok &= local;
                report["local"] = json!(local);
                inputs["presheaf"] = serde_json::to_value(pj)?;
            }
            Ok(verdict(report.clone(), ok, || json!({"inputs": inputs, "report": report})))
        }
        Command::Vdim { cospan } => {
            let c = read::<CospanJson>(cospan)?.to_model()?;
            Ok(success(json!({"vdim": virtual_dimension(&c)})))
        }
        Command::Tangent { cospan, point } => {
            let c = read::<CospanJson>(cospan)?.to_model()?;
            let p = read_point(&c, point.as_deref())?;
            let tc = tangent_complex(&c, &p)?;
            let homology: Vec<Value> = tc.homology().into_iter().map(|(d, h)| json!({"degree": d, "dim": h})).collect();
            Ok(success(json!({
                "dims": {"-1": c.c(), "0": c.a() + c.b()},
                "homology": homology,
                "euler": tc.euler_characteristic(),
                "vdim": virtual_dimension(&c),
            })))
        }
        Command::Transverse { cospan, point } => {
            let cj: CospanJson = read(cospan)?;
            let c = cj.to_model()?;
            let p = read_point(&c, point.as_deref())?;
            let t = is_transverse(&c, &p)?;
            let h = tangent_complex(&c, &p)?.homology_in(-1);
            let report = json!({"transverse": t, "h_minus_1": h});
            Ok(verdict(report.clone(), t, || {
                json!({"inputs": {"cospan": cj, "point": PointJson::from_model(&p)}, "report": report})
            }))
        }
        Command::Hochschild { cospan } => {
            let c = read::<CospanJson>(cospan)?.to_model()?;
            let (checked, failure) = hochschild_model(&c, levels).identity_report()?;
            let report = json!({
                "levels": (0..=levels).map(|n| hochschild_level(&c, n)).collect::<Vec<_>>(),
                "identities_checked": checked,
                "identity_failure": failure,
            });
            Ok(verdict(report.clone(), failure.is_none(), || report.clone()))
        }
        Command::Betti { cospan, point } => {
            let c = read::<CospanJson>(cospan)?.to_model()?;
            let p = read_point(&c, point.as_deref())?;
            Ok(success(json!({"betti": mapping_space_betti(&c, &p, cli.jet, levels, m)?})))
        }
        Command::NerveBetti { cospan, point } => {
            let c = read::<CospanJson>(cospan)?.to_model()?;
            let p = read_point(&c, point.as_deref())?;
            Ok(success(json!({"betti": nerve_cosimplicial_betti(&c, &p, cli.jet, levels, m)?})))
        }
        Command::Koszul { codim } => Ok(success(json!({"betti": koszul_betti(*codim as usize)}))),
        Command::PlCheck { bound } => {
            let b = parse_rational(bound).ok_or_else(|| Error::Parse {
                pos: 0,
                msg: format!("`{bound}` is not a rational p/q"),
            })?;
            let r = pl_retraction_check(&b);
            let report = serde_json::to_value(&r)?;
            Ok(verdict(report.clone(), r.ok(), || report.clone()))
        }
        Command::Sweep { suite, points, poset, corpus } => {
            let bounds = SweepBounds {
                points: *points,
                poset: *poset,
                trunc,
                jet: cli.jet,
                levels,
                corpus: *corpus,
                seed: cli.seed,
            };
            let r = sweep::run(suite, &bounds)?;
            let report = serde_json::to_value(&r)?;
            let witness = r.counterexample.clone();
            Ok(Outcome {
                report,
                verdict: r.passed(),
                witness,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j as usize).build_global() {
            eprintln!("cannot configure {j} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let outcome = run(&cli);
    eprintln!("dman {}: {:.3}s", cli.command.name(), start.elapsed().as_secs_f64());
    match outcome {
        Ok(out) => {
            let mut report = out.report;
            if let Some(w) = &out.witness {
                if report.is_object() {
                    report["witness"] = w.clone();
                }
                if let Some(path) = &cli.witness_out {
                    if let Err(e) = fs::write(path, io::to_string(w)) {
                        eprintln!("cannot write witness to {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
            }
            print!("{}", io::to_string(&report));
            ExitCode::from(if out.verdict { 0 } else { 1 })
        }
        Err(e) => {
            let report = json!({"error": e.kind(), "message": e.to_string()});
            print!("{}", io::to_string(&report));
            ExitCode::from(2)
        }
    }
}
