mod common;

use std::sync::Arc;
use std::thread;

use common::{small_spec, tiny_assessment, Env};
use limbscope::fixtures::FixtureKind;
use limbscope::session::{Brush, BrushRef, Cell, ComparisonState, ExportFormat, PresentationDoc, Session, Truncation};
use limbscope::store::{AssessmentQuery, PAGE_SIZE};
use limbscope::StoreError;
use limbscope_core::{Interval, ProportionSummary, Side};

fn session_with_brush(env: &Env, id: &str) -> Session {
    let mut s = Session::new(id, "analyst");
    s.created_ms = 1_700_000_000_000;
    s.modified_ms = 1_700_000_000_500;
    s.truncations.push(Truncation {
        patient_id: "P1".into(),
        motion_type: "shoulder_flexion".into(),
        side: Side::Affected,
        interval: Interval::new(0.5, 3.5),
    });
    s.comparisons.push(ComparisonState {
        patient_id: "P1".into(),
        motion_type: "shoulder_flexion".into(),
        muted: ["PQ".to_string()].into(),
        tau: 0.3,
    });
    s.brushes.push(Brush {
        id: "b1".into(),
        patient_id: "P1".into(),
        motion_type: "shoulder_flexion".into(),
        side: Side::Affected,
        interval: Interval::new(1.0, 2.0),
        note: "peak of flexion".into(),
    });
    let _ = env;
    s
}

fn env_with_pair() -> Env {
    let env = Env::new();
    env.fixture(&small_spec(FixtureKind::Clinical, "P1"));
    env
}

#[test]
fn session_round_trip_and_not_found() {
    let env = env_with_pair();
    let s = session_with_brush(&env, "s1");
    assert_eq!(env.store.save_session(&s).unwrap(), "s1");
    assert_eq!(env.store.load_session("s1").unwrap(), s);
    assert!(matches!(env.store.load_session("nope"), Err(StoreError::NotFound { .. })));
}

#[test]
fn session_validation() {
    let env = env_with_pair();
    let mut s = session_with_brush(&env, "s1");
    s.comparisons[0].tau = 1.5;
    assert!(env.store.save_session(&s).unwrap_err().to_string().contains("tau"));

    let mut s = session_with_brush(&env, "s1");
    s.brushes[0].interval = Interval::new(3.0, 3.9);
    let err = env.store.save_session(&s).unwrap_err().to_string();
    assert!(err.contains("brush 'b1'") && err.contains("[0.5, 3.5]"), "{err}");

    let mut s = session_with_brush(&env, "s1");
    s.brushes[0].patient_id = "P404".into();
    assert!(matches!(env.store.save_session(&s), Err(StoreError::NotFound { .. })));

    let mut s = session_with_brush(&env, "s1");
    s.truncations[0].interval = Interval::new(0.0, 99.0);
    assert!(env.store.save_session(&s).is_err());
}

#[test]
fn concurrent_saves_of_different_sessions() {
    let env = Arc::new(env_with_pair());
    let handles: Vec<_> = (0..8)
        .map(|k| {
            let env = env.clone();
            thread::spawn(move || {
                for round in 0..10 {
                    let mut s = session_with_brush(&env, &format!("s{k}"));
                    s.modified_ms = round;
                    env.store.save_session(&s).unwrap();
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    for k in 0..8 {
        let s = env.store.load_session(&format!("s{k}")).unwrap();
        assert_eq!(s.modified_ms, 9);
    }
}

#[test]
fn readers_never_see_partial_writes() {
    let env = Arc::new(env_with_pair());
    let mut big = session_with_brush(&env, "hot");
    big.owner = "x".repeat(200_000);
    env.store.save_session(&big).unwrap();
    let writer = {
        let env = env.clone();
        let big = big.clone();
        thread::spawn(move || {
            for round in 0..40 {
                let mut s = big.clone();
                s.modified_ms = round;
                env.store.save_session(&s).unwrap();
            }
        })
    };
    for _ in 0..200 {
        let s = env.store.load_session("hot").unwrap();
        assert_eq!(s.owner.len(), 200_000);
    }
    writer.join().unwrap();
}

fn snapshot(side: Side) -> ProportionSummary {
    ProportionSummary {
        side,
        interval: Interval::new(1.0, 2.0),
        shares: [("BIC".to_string(), 0.6), ("TRI".to_string(), 0.4)].into(),
    }
}

fn three_column_doc() -> PresentationDoc {
    let mut doc = PresentationDoc::new("deck", "Shoulder flexion findings");
    doc.subtitle = "Three patient groups".into();
    doc.rows = vec!["P1".into()];
    doc.columns = vec!["Group A".into(), "Group B".into(), "Group C".into()];
    for c in &doc.columns.clone() {
        doc.cells.push(Cell {
            row: "P1".into(),
            column: c.clone(),
            brush: BrushRef { session_id: "s1".into(), brush_id: "b1".into() },
            snapshot: snapshot(Side::Affected),
            annotation: format!("{c}: biceps dominate"),
        });
    }
    doc
}

#[test]
fn presentation_round_trip_and_render() {
    let env = env_with_pair();
    env.store.save_session(&session_with_brush(&env, "s1")).unwrap();
    let doc = three_column_doc();
    env.store.save_presentation(&doc).unwrap();
    assert_eq!(env.store.load_presentation("deck").unwrap(), doc);

    let bytes = env.store.export_presentation(&doc, ExportFormat::Document).unwrap();
    env.store.delete(limbscope::store::PRESENTATIONS, "deck").unwrap();
    let imported = env.store.import_presentation(&bytes).unwrap();
    assert_eq!(imported, doc);

    let svg = String::from_utf8(env.store.export_presentation(&doc, ExportFormat::StaticRender).unwrap()).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches(r#"class="column-label""#).count(), 3);
    for label in
        ["Group A", "Group B", "Group C", "BIC 60.0%", "TRI 40.0%", "biceps dominate", "Shoulder flexion findings"]
    {
        assert!(svg.contains(label), "{label}");
    }
}

#[test]
fn empty_presentation_renders_titles_only() {
    let env = Env::new();
    let mut doc = PresentationDoc::new("empty", "Empty deck");
    doc.subtitle = "nothing yet".into();
    env.store.save_presentation(&doc).unwrap();
    let svg = String::from_utf8(env.store.export_presentation(&doc, ExportFormat::StaticRender).unwrap()).unwrap();
    assert!(svg.contains("Empty deck") && svg.contains("nothing yet"));
    assert!(!svg.contains("class=\"cell\""));
    assert!(svg.trim_end().ends_with("</svg>"));
}

#[test]
fn dangling_brush_fails_and_names_the_cell() {
    let env = env_with_pair();
    let mut s = session_with_brush(&env, "s1");
    env.store.save_session(&s).unwrap();
    let doc = three_column_doc();
    env.store.save_presentation(&doc).unwrap();

    s.brushes.clear();
    env.store.save_session(&s).unwrap();
    let err = env.store.export_presentation(&doc, ExportFormat::StaticRender).unwrap_err().to_string();
    assert!(err.contains("cell (P1, Group B)") && err.contains("s1/b1"), "{err}");
    // The frozen snapshot is untouched by the session edit.
    assert_eq!(env.store.load_presentation("deck").unwrap().cells[0].snapshot, snapshot(Side::Affected));
}

#[test]
fn large_catalog_filters_to_one_pair() {
    let env = Env::new();
    for p in 0..106 {
        for side in Side::BOTH {
            env.put(tiny_assessment(&format!("P{p:03}"), if p % 2 == 0 { "flexion" } else { "abduction" }, side));
        }
    }
    let all = env.store.query_assessments(&AssessmentQuery::default()).unwrap();
    assert_eq!(all.total, 212);
    assert_eq!(all.items.len(), PAGE_SIZE);
    let page3 = env.store.query_assessments(&AssessmentQuery { page: Some(3), ..Default::default() }).unwrap();
    assert_eq!(page3.items.len(), 12);

    let q = AssessmentQuery { patient: Some("P042".into()), motion: Some("flexion".into()), ..Default::default() };
    let r = env.store.query_assessments(&q).unwrap();
    assert!(r.total <= 2 && r.total >= 1);
    assert_eq!(r.total, 2);

    let r =
        env.store.query_assessments(&AssessmentQuery { patient: Some("P041".into()), ..Default::default() }).unwrap();
    assert_eq!(r.facets.motion, vec!["abduction"]);

    // Every facet value, added to the filters, still matches something.
    for base in [AssessmentQuery::default(), AssessmentQuery { motion: Some("flexion".into()), ..Default::default() }] {
        let r = env.store.query_assessments(&base).unwrap();
        for p in &r.facets.patient {
            let q = AssessmentQuery { patient: Some(p.clone()), ..base.clone() };
            assert!(env.store.query_assessments(&q).unwrap().total >= 1);
        }
        for m in &r.facets.motion {
            let q = AssessmentQuery { motion: Some(m.clone()), ..base.clone() };
            assert!(env.store.query_assessments(&q).unwrap().total >= 1);
        }
        for s in &r.facets.side {
            let q = AssessmentQuery { side: Some(*s), ..base.clone() };
            assert!(env.store.query_assessments(&q).unwrap().total >= 1);
        }
    }
}

#[test]
fn empty_catalog_query() {
    let env = Env::new();
    let r = env.store.query_assessments(&AssessmentQuery::default()).unwrap();
    assert_eq!(r.total, 0);
    assert!(r.facets.patient.is_empty() && r.facets.motion.is_empty() && r.facets.side.is_empty());
}
