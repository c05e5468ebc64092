//! Golden transcripts for the documented invocations. Set `QDIST_BLESS=1` to
//! rewrite the expected files after an intended output change.

mod common;

use common::{corpus, golden_cases, golden_path, qdist, qdist_str};
use qdist::algebra::{Algebra, AlgebraParams};
use qdist::expr::{eval, parse_expr, parse_for};
use qdist::format::element_text;

#[test]
fn transcripts_match_golden_files() {
    let bless = std::env::var_os("QDIST_BLESS").is_some();
    let mut mismatched = Vec::new();
    for case in golden_cases() {
        let run = qdist(&case.args, &case.env);
        let path = golden_path(&case.name);
        if bless {
            std::fs::write(&path, run.transcript()).unwrap();
        }
        let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
        if run.code != case.exit || run.transcript() != expected {
            mismatched.push(format!(
                "{}: exit {} (want {})\n{}",
                case.name,
                run.code,
                case.exit,
                run.transcript()
            ));
        }
    }
    assert!(mismatched.is_empty(), "{}", mismatched.join("\n"));
}

#[test]
fn corpus_is_a_print_parse_fixed_point() {
    let exprs = corpus();
    assert!(exprs.len() >= 50);
    let params = AlgebraParams::new(3, 1, 1).unwrap();
    let alg = Algebra::new(params).unwrap();
    for src in &exprs {
        let ast = parse_for(src, &params).unwrap_or_else(|e| panic!("{src:?}: {e}"));
        let printed = ast.to_string();
        assert_eq!(parse_expr(&printed).unwrap(), ast, "{src:?} printed as {printed:?}");
        assert_eq!(parse_expr(&printed).unwrap().to_string(), printed);
        let value = eval(&ast, &alg).unwrap();
        let canonical = element_text(&value);
        assert_eq!(eval(&parse_for(&canonical, &params).unwrap(), &alg).unwrap(), value, "{src:?}");
    }
}

#[test]
fn warm_cache_output_equals_cold_output() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("l3n1.qdm").to_string_lossy().into_owned();
    let expr = "F(8)*E(8)*F(4)*E(5)";
    let plain = qdist_str(&["--N", "1", "nf", expr]);
    let cold = qdist_str(&["--N", "1", "--cache", &cache, "nf", expr]);
    let bytes = std::fs::read(&cache).unwrap();
    let warm = qdist_str(&["--N", "1", "--cache", &cache, "nf", expr]);
    assert_eq!(cold.code, 0);
    assert_eq!(cold.stdout, plain.stdout);
    assert_eq!(warm.stdout, cold.stdout);
    assert_eq!(std::fs::read(&cache).unwrap(), bytes);

    let refused = qdist_str(&["--ell", "5", "--N", "1", "--cache", &cache, "nf", expr]);
    assert_eq!(refused.code, 2);
    assert!(refused.stderr.contains("cache refused"), "{}", refused.stderr);
}
