use tomo_cli::report::{EstimateKind, ERROR_CAVEAT};
use tomo_cli::{analyze, emit, ingest_bytes, write_counts, AnalysisOptions, Format, REPORT_SCHEMA};
use tomo_core::linalg::{ONE, ZERO};
use tomo_core::{generate_counts, DensityMatrix, GeneratorConfig, NoiseMode, TomographySet};

const PAPER: &str = "nu,label,count
1,HH,34749
2,HV,324
3,VV,35805
4,VH,444
5,RH,16324
6,RV,17521
7,DV,13441
8,DH,16901
9,DR,17932
10,DD,32028
11,RD,15132
12,HD,17238
13,VD,13171
14,VL,17170
15,HL,16722
16,RL,33586
";

fn paper_report(options: &AnalysisOptions) -> tomo_cli::AnalysisReport {
    analyze(&ingest_bytes(PAPER.as_bytes()).unwrap(), options).unwrap()
}

fn within_quarter(got: Option<f64>, want: f64) {
    let got = got.expect("error bar present");
    assert!((got - want).abs() / want <= 0.25, "{got} vs {want}");
}

#[test]
fn paper_dataset_reports_measures_and_error_bars() {
    let r = paper_report(&AnalysisOptions::default());
    assert_eq!(r.schema, REPORT_SCHEMA);
    assert_eq!(r.input.normalization, 71322.0);
    assert!(!r.linear.physicality.physical);
    let mle = r.mle.as_ref().unwrap();
    assert!(mle.converged && mle.physicality.physical);
    let m = r.measures.as_ref().unwrap();
    assert_eq!(m.estimate, EstimateKind::Mle);
    for v in [m.entropy, m.linear_entropy, m.concurrence, m.tangle, m.eof] {
        assert!(v.value.is_finite() && v.value >= 0.0);
    }
    within_quarter(m.entropy.error, 0.049);
    within_quarter(m.linear_entropy.error, 0.026);
    within_quarter(m.concurrence.error, 0.018);
    within_quarter(m.tangle.error, 0.034);
    within_quarter(m.eof.error, 0.025);
    let e = r.errors.as_ref().unwrap();
    assert_eq!(e.caveat, ERROR_CAVEAT);
    assert_eq!(e.lambda.len(), 16);
    assert_eq!(e.lambda[0].label, "HH");
    assert!(e.concurrence_gradient.starts_with("finite difference"));
    assert!(r.warnings.iter().any(|w| w.contains("not physical")));
}

#[test]
fn text_output_prints_four_decimals() {
    let r = paper_report(&AnalysisOptions::default());
    let text = emit(&r, Format::Text);
    let first = text
        .lines()
        .skip_while(|l| *l != "linear estimate")
        .nth(1)
        .unwrap();
    assert!(first.trim_start().starts_with("0.4872+0.0000i"), "{first}");
    assert!(first.contains("0.5192+0.0380i"));
    assert!(text.contains("not modeled"));
}

#[test]
fn json_round_trips_and_carries_dims() {
    let r = paper_report(&AnalysisOptions::default());
    let json = emit(&r, Format::Json);
    let back: tomo_cli::AnalysisReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["schema"], "tomo-report/1");
    assert_eq!(v["linear"]["rho"]["dims"], 4);
    assert_eq!(v["mle"]["rho"]["dims"], 4);
    let z = &v["linear"]["rho"]["data"][0][3];
    assert!((z["re"].as_f64().unwrap() - 0.5192).abs() < 1e-4);
    assert!((z["im"].as_f64().unwrap() - 0.0380).abs() < 1e-4);
    assert_eq!(v["provenance"]["input_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(v["provenance"]["options"]["max_evals"], 100_000);
}

#[test]
fn linear_only_skips_the_fit() {
    let r = paper_report(&AnalysisOptions {
        linear_only: true,
        ..AnalysisOptions::default()
    });
    assert!(r.mle.is_none());
    // the unphysical linear estimate has no entropy
    assert!(r.measures.is_none());
    assert!(r.errors.is_none());
    assert!(r.warnings.iter().any(|w| w.contains("measures skipped")));
}

#[test]
fn options_change_the_error_model() {
    let base = paper_report(&AnalysisOptions::default());
    let wide = paper_report(&AnalysisOptions {
        delta_theta_deg: Some(1.0),
        ..AnalysisOptions::default()
    });
    assert_eq!(wide.input.delta_theta_deg, 1.0);
    let a = base.measures.unwrap().concurrence.error.unwrap();
    let b = wide.measures.unwrap().concurrence.error.unwrap();
    assert!(b > a);
}

#[test]
fn analysis_is_deterministic() {
    let opts = AnalysisOptions::default();
    assert_eq!(paper_report(&opts), paper_report(&opts));
}

#[test]
fn hash_follows_the_input_bytes() {
    let a = ingest_bytes(PAPER.as_bytes()).unwrap();
    let b = ingest_bytes(PAPER.as_bytes()).unwrap();
    let c = ingest_bytes(format!("# same counts\n{PAPER}").as_bytes()).unwrap();
    assert_eq!(a.sha256, b.sha256);
    assert_ne!(a.sha256, c.sha256);
    assert_eq!(a.record, c.record);
}

#[test]
fn noiseless_horizontal_pair() {
    let set = TomographySet::table1();
    let cfg = GeneratorConfig {
        rho_true: DensityMatrix::pure(&[ONE, ZERO, ZERO, ZERO]).unwrap(),
        total_flux: 1e4,
        delta_theta: 0.0,
        noise_mode: NoiseMode::Noiseless,
        seed: 0,
    };
    let rec = generate_counts(&cfg, &set).unwrap();
    let labels: Vec<String> = set.states.iter().map(|s| s.label.clone()).collect();
    let mut buf = Vec::new();
    write_counts(&mut buf, &rec, &labels).unwrap();
    let r = analyze(&ingest_bytes(&buf).unwrap(), &AnalysisOptions::default()).unwrap();
    assert!(r.linear.physicality.physical);
    let m = r.measures.unwrap();
    assert!(m.entropy.value.abs() < 1e-6);
    assert!(m.concurrence.value.abs() < 1e-6);
    let lin = r.linear.rho.to_complex_matrix().unwrap();
    let mle = r.mle.unwrap().rho.to_complex_matrix().unwrap();
    assert!(mle.max_abs_diff(&lin) < 1e-6);
    assert!((lin[(0, 0)].re - 1.0).abs() < 1e-10);
}
