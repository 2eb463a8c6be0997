use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use pigeom::calculus::{
    associated_graded, commutator_filtration, fedosov_identity_report, graded_decomposition, hochschild_low, kaehler_one_forms,
    odd_ideal_filtration, tangent_object, FormsArena,
};
use pigeom::grading::{corner_algebra, validate_algebra, FiniteGradedAlgebra, GradingGroup, HomogeneousElement};
use pigeom::identities::{
    codimension_table, is_graded_identity, is_identity_in, relatively_free_truncation, variety_contains, GradedVariable, IdentitySource,
    KernelConfig, MultilinearPattern,
};
use pigeom::io::{algebra_to_json, parse_polynomial, Loader};
use pigeom::morita::{corner_variety_certificate, matrix_over, morita_ringed_morphism};
use pigeom::rational::parse_q;
use pigeom::sheaves::{
    build_recovering_morphism, cech_complex, check_locally_ringed, check_sheaf_with, pushforward, sheafify, stalk_at, stalk_isomorphism,
    ContinuousMap, PresheafOfAlgebras, RecoveringOptions, VectorPresheaf,
};
use pigeom::suite::{run_suite, SuiteConfig};
use pigeom::{Error, Exec, Result, Verdict, VerificationReport};

use crate::args::*;

/// What one invocation produced: reports in canonical order.
pub struct Outcome {
    pub reports: Vec<VerificationReport>,
}

impl Outcome {
    fn one(r: VerificationReport) -> Self {
        Self { reports: vec![r] }
    }

    pub fn verdict(&self) -> Verdict {
        self.reports.iter().fold(Verdict::Pass, |v, r| v.and(r.verdict))
    }
}

struct Ctx<'a> {
    common: &'a Common,
    cwd: Loader,
}

impl Ctx<'_> {
    fn kernel(&self) -> KernelConfig {
        let mut k = KernelConfig::default().with_exec(if self.common.sequential { Exec::Sequential } else { Exec::Parallel });
        if let Some(b) = self.common.budget {
            k.max_ops = b;
        }
        k
    }

    fn degree(&self, default: usize) -> usize {
        self.common.degree.unwrap_or(default)
    }

    fn require_degree(&self) -> Result<usize> {
        self.common.degree.ok_or_else(|| Error::Precondition("--degree is required".into()))
    }

    fn algebra_ref(&self, r: &str) -> Result<FiniteGradedAlgebra> {
        self.cwd.algebra(&Value::String(r.to_string()))
    }

    /// `--algebra`, else `--in`.
    fn algebra(&self) -> Result<FiniteGradedAlgebra> {
        match (&self.common.algebra, &self.common.input) {
            (Some(a), _) => self.algebra_ref(a),
            (None, Some(p)) => self.cwd.algebra(&Value::String(path_str(p))),
            (None, None) => Err(Error::Precondition("an algebra is required: pass --algebra or --in".into())),
        }
    }

    fn presheaf_at(&self, path: &Path, topology: Option<&str>) -> Result<PresheafOfAlgebras> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if let Some(t) = topology {
            // Resolve against the working directory, not the presheaf file.
            let resolved = if t.ends_with(".json") { path_str(&absolute(Path::new(t))) } else { t.to_string() };
            v["topology"] = Value::String(resolved);
        }
        Loader::beside(path).presheaf(&v)
    }

    fn presheaf(&self, a: &PresheafArgs) -> Result<PresheafOfAlgebras> {
        let path = a
            .presheaf
            .as_ref()
            .or(self.common.input.as_ref())
            .ok_or_else(|| Error::Precondition("a presheaf is required: pass --presheaf or --in".into()))?;
        self.presheaf_at(path, a.topology.as_deref())
    }
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn absolute(p: &Path) -> PathBuf {
    std::env::current_dir().map(|d| d.join(p)).unwrap_or_else(|_| p.to_path_buf())
}

/// Everything the reports need to be reproduced.
pub fn config_echo(cli: &Cli) -> Value {
    let c = &cli.common;
    let kernel = KernelConfig::default();
    json!({
        "command": command_path(&cli.command),
        "input": c.input.as_ref().map(|p| path_str(p)),
        "algebra": c.algebra,
        "degree": c.degree,
        "budget": c.budget.unwrap_or(kernel.max_ops),
        "max_pattern_degree": kernel.max_degree,
        "seed": c.seed,
        "sequential": c.sequential,
    })
}

fn command_path(c: &Command) -> String {
    match c {
        Command::Algebra(a) => format!(
            "algebra {}",
            match a {
                AlgebraCmd::Validate => "validate",
                AlgebraCmd::Build => "build",
            }
        ),
        Command::Identities(i) => format!(
            "identities {}",
            match i {
                IdentitiesCmd::Check(_) => "check",
                IdentitiesCmd::Kernel(_) => "kernel",
                IdentitiesCmd::Codim { .. } => "codim",
                IdentitiesCmd::Variety { .. } => "variety",
                IdentitiesCmd::Relfree { .. } => "relfree",
            }
        ),
        Command::Sheaf(s) => format!(
            "sheaf {}",
            match s {
                SheafCmd::Check(_) => "check",
                SheafCmd::Stalk { .. } => "stalk",
                SheafCmd::Sheafify(_) => "sheafify",
                SheafCmd::Pushforward { .. } => "pushforward",
                SheafCmd::LocallyRinged(_) => "locally-ringed",
                SheafCmd::Cech(_) => "cech",
                SheafCmd::Recover { .. } => "recover",
            }
        ),
        Command::Calculus(c) => format!(
            "calculus {}",
            match c {
                CalculusCmd::Omega1 => "omega1",
                CalculusCmd::Der => "der",
                CalculusCmd::Hochschild => "hochschild",
                CalculusCmd::Tangent => "tangent",
                CalculusCmd::Fedosov { .. } => "fedosov",
                CalculusCmd::Filtration { .. } => "filtration",
            }
        ),
        Command::Morita(m) => format!(
            "morita {}",
            match m {
                MoritaCmd::Matrix { .. } => "matrix",
                MoritaCmd::Corner { .. } => "corner",
                MoritaCmd::Certify => "certify",
                MoritaCmd::Morphism { .. } => "morphism",
            }
        ),
        Command::Suite { name } => format!("suite {name}"),
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let ctx = Ctx { common: &cli.common, cwd: Loader::new(std::env::current_dir().unwrap_or_default()) };
    match &cli.command {
        Command::Algebra(c) => algebra(&ctx, c),
        Command::Identities(c) => identities(&ctx, c),
        Command::Sheaf(c) => sheaf(&ctx, c),
        Command::Calculus(c) => calculus(&ctx, c),
        Command::Morita(c) => morita(&ctx, c),
        Command::Suite { name } => {
            let cfg = SuiteConfig { seed: cli.common.seed, kernel: ctx.kernel(), ..SuiteConfig::default() };
            let s = run_suite(name, &cfg)?;
            let reports = s.entries.into_iter().map(|(id, r)| r.with_detail("criterion", id)).collect();
            Ok(Outcome { reports })
        }
    }
}

fn algebra(ctx: &Ctx, c: &AlgebraCmd) -> Result<Outcome> {
    let a = ctx.algebra()?;
    Ok(Outcome::one(match c {
        AlgebraCmd::Validate => validate_algebra(&a).with_detail("dim", a.dim()).with_detail("components", component_json(&a)),
        AlgebraCmd::Build => {
            let r = validate_algebra(&a);
            r.with_detail("algebra", algebra_to_json(&a))
        }
    }))
}

fn component_json(a: &FiniteGradedAlgebra) -> Value {
    Value::Array(a.component_dims().into_iter().map(|(g, d)| json!([g.to_string(), d])).collect())
}

fn parse_degree(group: &GradingGroup, text: &str) -> Result<pigeom::grading::GroupElem> {
    let coords: Vec<i64> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad degree coordinate {s:?}"))))
        .collect::<Result<_>>()?;
    group.elem(&coords)
}

fn identities(ctx: &Ctx, c: &IdentitiesCmd) -> Result<Outcome> {
    let a = ctx.algebra()?;
    let cfg = ctx.kernel();
    match c {
        IdentitiesCmd::Check(p) => {
            let f = parse_polynomial(&p.poly, a.group())?;
            let direct = is_graded_identity(&f, &a, &cfg)?.with_detail("polynomial", f.to_string());
            let via_kernel = is_identity_in(&a, &f, &cfg)?;
            let mut r = direct;
            r.detail("kernel_agrees", r.verdict == via_kernel.verdict);
            Ok(Outcome::one(r))
        }
        IdentitiesCmd::Kernel(p) => {
            let (source, pattern) = match &p.pattern {
                Some(text) => {
                    let degrees = text.split(';').map(|d| parse_degree(a.group(), d)).collect::<Result<Vec<_>>>()?;
                    (a.clone(), MultilinearPattern::new(a.group().clone(), degrees))
                }
                None => (a.trivialize(), MultilinearPattern::ungraded(ctx.require_degree()?)),
            };
            let k = source.kernel(&pattern, &cfg)?;
            let mut r = VerificationReport::pass("identity_kernel");
            r.detail("pattern", pattern.describe());
            r.detail("graded", p.pattern.is_some());
            r.detail("codimension", k.codimension);
            r.detail("kernel_dim", k.dim());
            r.detail("kernel", k.to_json());
            Ok(Outcome::one(r.with_truncation(pattern.n())))
        }
        IdentitiesCmd::Codim { ungraded } => {
            let d = ctx.degree(4);
            let src = if *ungraded { a.trivialize() } else { a.clone() };
            let rows = codimension_table(&src, d, &cfg)?;
            let mut r = VerificationReport::pass("codimension_table").with_truncation(d);
            r.detail("codimensions", rows.iter().map(|x| x.codimension).collect::<Vec<_>>());
            r.detail("rows", rows.iter().map(|x| x.to_json()).collect::<Vec<_>>());
            Ok(Outcome::one(r))
        }
        IdentitiesCmd::Variety { other } => {
            let b = ctx.algebra_ref(other)?;
            let r = variety_contains(&a, &b, ctx.require_degree()?, &cfg)?;
            Ok(Outcome::one(r))
        }
        IdentitiesCmd::Relfree { vars } => {
            let g = a.group();
            let variables: Vec<GradedVariable> = match vars.trim().parse::<usize>() {
                Ok(n) => (1..=n).map(|i| GradedVariable::new(i, g.identity())).collect(),
                Err(_) => {
                    vars.split(';').enumerate().map(|(i, d)| Ok(GradedVariable::new(i + 1, parse_degree(g, d)?))).collect::<Result<_>>()?
                }
            };
            let d = ctx.require_degree()?;
            let rf = relatively_free_truncation(&a, &variables, d, &cfg)?;
            let alg = rf.as_algebra(g)?;
            let check = variety_contains(&a, &alg, d, &cfg)?;
            let mut r = VerificationReport::pass("relatively_free").with_truncation(d);
            r.detail("relatively_free", rf.to_json());
            r.detail("in_variety", check.verdict.to_json());
            r.absorb(check.verdict, check.witness);
            Ok(Outcome::one(r))
        }
    }
}

fn point_index(f: &PresheafOfAlgebras, p: &str) -> Result<usize> {
    let pts = f.topology().points();
    pts.iter()
        .position(|x| x == p)
        .or_else(|| p.parse::<usize>().ok().filter(|&i| i < pts.len()))
        .ok_or_else(|| Error::Precondition(format!("unknown point {p:?}")))
}

fn sheaf(ctx: &Ctx, c: &SheafCmd) -> Result<Outcome> {
    let exec = ctx.kernel().exec;
    match c {
        SheafCmd::Check(p) => Ok(Outcome::one(check_sheaf_with(&ctx.presheaf(p)?, exec)?)),
        SheafCmd::Stalk { presheaf, point } => {
            let f = ctx.presheaf(presheaf)?;
            let x = point_index(&f, point)?;
            let s = stalk_at(&f, x)?;
            let mut r = s.verify_cocone(&f)?;
            r.detail("point", f.topology().points()[x].clone());
            r.detail("minimal_open", f.open_name(s.open));
            r.detail("stalk", algebra_to_json(&s.algebra));
            r.detail("germ_colimit_dim", pigeom::sheaves::germ_colimit_dim(&f, x)?);
            Ok(Outcome::one(r))
        }
        SheafCmd::Sheafify(p) => {
            let f = ctx.presheaf(p)?;
            let sff = sheafify(&f)?;
            let mut r = check_sheaf_with(&sff.sheaf, exec)?;
            r.check = "sheafify".into();
            let t = f.topology();
            r.detail("input_is_sheaf", check_sheaf_with(&f, exec)?.is_pass());
            r.detail("eta_is_isomorphism", sff.eta.is_isomorphism());
            r.detail("eta_natural", sff.eta.verify()?.is_pass());
            r.detail(
                "section_dims",
                (0..t.n_opens()).map(|u| json!([f.open_name(u), f.section(u).dim(), sff.sheaf.section(u).dim()])).collect::<Vec<_>>(),
            );
            for x in 0..t.n_points() {
                let ok = stalk_isomorphism(&f, &sff, x).map(|phi| pigeom::grading::verify_isomorphism(&phi).is_pass()).unwrap_or(false);
                if !ok {
                    r.absorb(Verdict::Fail, Some(json!({"stalk_not_preserved": t.points()[x]})));
                }
            }
            Ok(Outcome::one(r))
        }
        SheafCmd::Pushforward { presheaf, target, map } => {
            let f = ctx.presheaf(presheaf)?;
            let tgt = ctx.cwd.topology(&Value::String(if target.ends_with(".json") {
                path_str(&absolute(Path::new(target)))
            } else {
                target.clone()
            }))?;
            let src = f.topology().clone();
            let mut images = vec![None; src.n_points()];
            for pair in map.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (a, b) = pair.split_once('=').ok_or_else(|| Error::Parse(format!("map entry {pair:?} is not a=b")))?;
                let x = point_index(&f, a.trim())?;
                let y = tgt
                    .points()
                    .iter()
                    .position(|p| p == b.trim())
                    .ok_or_else(|| Error::Precondition(format!("unknown target point {b:?}")))?;
                images[x] = Some(y);
            }
            let images: Vec<usize> = images
                .into_iter()
                .enumerate()
                .map(|(x, y)| y.ok_or_else(|| Error::Precondition(format!("no image for point {}", src.points()[x]))))
                .collect::<Result<_>>()?;
            let cont = pigeom::sheaves::check_continuity(&src, &tgt, &images)?;
            if !cont.is_pass() {
                return Ok(Outcome::one(cont));
            }
            let phi = ContinuousMap::new(src, tgt.clone(), images)?;
            let g = pushforward(&phi, &f)?;
            let mut r = check_sheaf_with(&g, exec)?;
            r.check = "pushforward".into();
            r.detail("source_is_sheaf", check_sheaf_with(&f, exec)?.is_pass());
            r.detail("section_dims", (0..tgt.n_opens()).map(|u| json!([g.open_name(u), g.section(u).dim()])).collect::<Vec<_>>());
            r.note("verdict is the sheaf check of the direct image");
            Ok(Outcome::one(r))
        }
        SheafCmd::LocallyRinged(p) => Ok(Outcome::one(check_locally_ringed(&ctx.presheaf(p)?)?)),
        SheafCmd::Cech(p) => {
            let f = ctx.presheaf(p)?;
            let c = cech_complex(&VectorPresheaf::from_algebras(&f))?;
            let mut r = VerificationReport::pass("cech_h1");
            r.detail("h0", c.h0());
            r.detail("h1", c.h1());
            r.detail("cover", c.cover.iter().map(|&u| f.open_name(u)).collect::<Vec<_>>());
            r.absorb(Verdict::from_bool(c.d1.mul(&c.d0).is_zero()), Some(json!({"reason": "d1·d0 ≠ 0"})));
            Ok(Outcome::one(r))
        }
        SheafCmd::Recover { presheaf, other, reference } => {
            let f = ctx.presheaf(presheaf)?;
            let g = ctx.presheaf_at(other, presheaf.topology.as_deref())?;
            let reference = reference.as_deref().map(|r| ctx.algebra_ref(r)).transpose()?;
            let opts = RecoveringOptions {
                reference: reference.as_ref().map(|a| a as &dyn IdentitySource),
                candidate: None,
                kernel: ctx.kernel(),
            };
            let out = build_recovering_morphism(&f, &g, ctx.degree(3), &opts)?;
            let mut r = out.report;
            if let Some(m) = out.morphism {
                r.detail("components", m.components.iter().map(|c| json!([c.rows(), c.cols()])).collect::<Vec<_>>());
            }
            Ok(Outcome::one(r))
        }
    }
}

fn calculus(ctx: &Ctx, c: &CalculusCmd) -> Result<Outcome> {
    if let CalculusCmd::Fedosov { vars, cap, samples, product } = c {
        let p = cap.or(ctx.common.degree.map(|d| d as u32)).unwrap_or(3);
        let arena = FormsArena::new(*vars, p)?;
        if let Some(forms) = product {
            let a = arena.parse(&forms[0])?;
            let b = arena.parse(&forms[1])?;
            let mut r = VerificationReport::pass("fedosov_product");
            r.detail("product", arena.fedosov(&a, &b)?.to_string());
            r.detail("commutator", arena.fedosov_commutator(&a, &b)?.to_string());
            r.detail("d_wedge_d", arena.wedge(&arena.d(&a), &arena.d(&b))?.to_string());
            return Ok(Outcome::one(r));
        }
        return Ok(Outcome::one(fedosov_identity_report(arena, *samples, ctx.common.seed)?));
    }
    let a = ctx.algebra()?;
    Ok(Outcome::one(match c {
        CalculusCmd::Omega1 => {
            let k = kaehler_one_forms(&a);
            let mut r = k.module.verify();
            r.check = "kaehler_one_forms".into();
            r.detail("dim_algebra", a.dim());
            r.detail("dim_omega1", k.dim());
            r.detail("basis", k.kernel.basis().iter().map(|v| pigeom::rational::fmt_vec(v)).collect::<Vec<_>>());
            r
        }
        CalculusCmd::Der => {
            let (parts, mut r) = graded_decomposition(&a);
            r.detail("by_degree", parts.iter().map(|(g, d)| json!([g.to_string(), d.dim()])).collect::<Vec<_>>());
            r
        }
        CalculusCmd::Hochschild => hochschild_low(&a).report,
        CalculusCmd::Tangent => tangent_object(&a).report,
        CalculusCmd::Filtration { kind } => {
            if kind == "odd" {
                let chain = odd_ideal_filtration(&a);
                let gr = associated_graded(&chain)?;
                let mut r = chain.verify();
                r.check = "odd_ideal_filtration".into();
                r.detail("dims", chain.dims());
                r.detail("reaches_zero", chain.reaches_zero);
                r.detail("associated_graded_level_dims", gr.level_dims.clone());
                r.detail("associated_graded_dim", gr.algebra.dim());
                r
            } else {
                let cf = commutator_filtration(&a, ctx.degree(a.dim().max(1)))?;
                cf.report
            }
        }
        CalculusCmd::Fedosov { .. } => unreachable!("handled above"),
    }))
}

fn morita(ctx: &Ctx, c: &MoritaCmd) -> Result<Outcome> {
    let cfg = ctx.kernel();
    let context = || -> Result<pigeom::morita::MoritaContext> {
        let p = ctx.common.input.as_ref().ok_or_else(|| Error::Precondition("a Morita context file is required: pass --in".into()))?;
        ctx.cwd.morita(&Value::String(path_str(p)))
    };
    Ok(Outcome::one(match c {
        MoritaCmd::Matrix { n } => {
            let b = ctx.algebra()?;
            let m = matrix_over(&b, *n)?;
            validate_algebra(&m)
                .with_detail("dim", m.dim())
                .with_detail("components", component_json(&m))
                .with_detail("algebra", algebra_to_json(&m))
        }
        MoritaCmd::Corner { idempotent } => {
            let a = ctx.algebra()?;
            let coords = idempotent.split(',').map(parse_q).collect::<Result<Vec<_>>>()?;
            let e = HomogeneousElement::from_coords(&a, coords)?;
            let corner = corner_algebra(&a, &e)?;
            validate_algebra(&corner.algebra)
                .with_detail("dim", corner.algebra.dim())
                .with_detail("algebra", algebra_to_json(&corner.algebra))
        }
        MoritaCmd::Certify => corner_variety_certificate(&context()?, ctx.degree(4), &cfg)?,
        MoritaCmd::Morphism { presheaf, other } => {
            let f = ctx.presheaf_at(presheaf, None)?;
            let g = ctx.presheaf_at(other, None)?;
            morita_ringed_morphism(&f, &g, &context()?, ctx.degree(4), &cfg)?.report
        }
    }))
}
