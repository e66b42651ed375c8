//! Acceptance suite: one PASS/FAIL line per criterion, each checked against
//! its time budget. Exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use chrono::{NaiveDate, TimeZone, Utc};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use stp_core::eval::oracle::{compare_recommendations, oracle_recommend};
use stp_core::eval::synth::{generate_population, SyntheticSpec};
use stp_core::eval::{leave_one_out, random_case, random_case_today};
use stp_core::fixtures::{benjie, benjie_input, josh, josh_input, profile};
use stp_core::ingest::{ingest_feed, FeedFormat, TagVocabulary};
use stp_core::recommend::{collab_score, LikeIndex};
use stp_core::similarity::{nearest_neighbors, profile_similarity};
use stp_core::store::{load_state, save_state, write_atomic_with};
use stp_core::survey::{composite_mean, interpret, rank_by_mean, InterpretationScale};
use stp_core::{Exec, LikeEvent, RecommendParams, Recommender, SimilarityParams, StateSnapshot, Store};
use stp_service::{router, AppState};
use tower::ServiceExt;

type Check = Result<String, String>;
type Criterion = (&'static str, u64, Box<dyn Fn() -> Check>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn survey_arithmetic() -> Check {
    let composite = composite_mean(&[4.71, 4.58, 4.71]).map_err(|e| e.to_string())?;
    ensure(composite == 4.67, || format!("composite {composite}"))?;
    let label = interpret(composite, &InterpretationScale::acceptance()).map_err(|e| e.to_string())?;
    ensure(label == "Highly Acceptable", || format!("acceptance label {label:?}"))?;
    let label = interpret(4.26, &InterpretationScale::occurrence()).map_err(|e| e.to_string())?;
    ensure(label == "Always Encountered", || format!("occurrence label {label:?}"))?;
    let means: Vec<(String, f64)> = [4.84, 4.79, 4.53, 4.47, 4.26]
        .iter()
        .enumerate()
        .map(|(i, m)| (format!("issue {}", i + 1), *m))
        .collect();
    let ranks: Vec<usize> = rank_by_mean(&means).iter().map(|r| r.rank).collect();
    ensure(ranks == [1, 2, 3, 4, 5], || format!("ranks {ranks:?}"))?;
    Ok("composite 4.67 Highly Acceptable, 4.26 Always Encountered, ranks 1-5".into())
}

fn similarity_fixture() -> Check {
    let p = SimilarityParams::default();
    let (j, b) = (josh(), benjie());
    let s = profile_similarity(&j, &b, &p);
    ensure((s - 0.46875).abs() <= 1e-9, || format!("sim(Josh, Benjie) = {s}"))?;
    let id = profile_similarity(&j, &j, &p);
    ensure(id == 1.0, || format!("identity {id}"))?;
    let other = profile("x", "cics", &["bs-it"], &["networking"], &["cisco"]);
    let d = profile_similarity(&j, &other, &p);
    ensure(d == 0.0, || format!("disjoint {d}"))?;
    Ok(format!("sim = {s}"))
}

fn oracle_equivalence() -> Check {
    let seeds = 200u64;
    let today = random_case_today();
    let mut compared = 0;
    for seed in 0..seeds {
        let (state, params) = random_case(seed, 5, 10);
        let engine = Recommender::from_snapshot(&state);
        for user in &state.faculty {
            let got = engine.recommend(user, &params, today);
            let want = oracle_recommend(user, &state, &params, today);
            compare_recommendations(&got, &want, 1e-9).map_err(|e| format!("seed {seed}, {}: {e}", user.faculty_id))?;
            compared += 1;
        }
    }
    Ok(format!("{seeds} states, {compared} feeds identical"))
}

fn like_propagation() -> Check {
    let today = random_case_today();
    let mut states = 0;
    let mut seed = 0u64;
    while states < 50 {
        ensure(seed < 20_000, || format!("only {states} usable states"))?;
        let (state, mut params) = random_case(1_000 + seed, 5, 10);
        seed += 1;
        params.include_past_items = true;
        params.limit = state.items.len().max(1);
        if params.alpha >= 1.0 {
            params.alpha = 0.5;
        }
        let Some((user, neighbor, item)) = propagation_case(&state, &params) else {
            continue;
        };
        let before_likes = LikeIndex::from_events(&state.likes);
        let mut after = state.clone();
        after.likes.push(LikeEvent {
            faculty_id: neighbor.clone(),
            stp_id: item.stp_id.clone(),
            liked_at: stp_core::fixtures::epoch(),
        });
        let after_likes = LikeIndex::from_events(&after.likes);
        let u = state.faculty(&user).expect("user");
        let neighbors = nearest_neighbors(u, &state.faculty, &params.similarity);
        let (c0, c1) = (collab_score(item, &neighbors, &before_likes), collab_score(item, &neighbors, &after_likes));
        ensure(c1 > c0, || format!("seed {seed}: collab {c0} -> {c1}"))?;

        let scores = |s: &StateSnapshot| -> BTreeMap<String, f64> {
            Recommender::from_snapshot(s)
                .recommend(u, &params, today)
                .into_iter()
                .map(|r| (r.stp_id.to_string(), r.score))
                .collect()
        };
        let (mut s0, mut s1) = (scores(&state), scores(&after));
        let (i0, i1) = (s0.remove(item.stp_id.as_str()).unwrap_or(0.0), s1.remove(item.stp_id.as_str()).unwrap_or(0.0));
        ensure(i1 > i0, || format!("seed {seed}: score {i0} -> {i1}"))?;
        ensure(s0 == s1, || format!("seed {seed}: other scores changed"))?;
        states += 1;
    }
    Ok(format!("{states} states, strict increase, others unchanged"))
}

/// A user, a positive-similarity neighbor and a candidate item the
/// neighbor has not liked yet.
fn propagation_case<'s>(
    state: &'s StateSnapshot,
    params: &RecommendParams,
) -> Option<(stp_core::FacultyId, stp_core::FacultyId, &'s stp_core::StpItem)> {
    let likes = LikeIndex::from_events(&state.likes);
    for u in &state.faculty {
        for n in nearest_neighbors(u, &state.faculty, &params.similarity) {
            for item in &state.items {
                let own = likes.liked(&u.faculty_id, &item.stp_id)
                    || state.attendance.iter().any(|a| a.faculty_id == u.faculty_id && a.stp_id == item.stp_id);
                if n.similarity > 0.0 && !own && !likes.liked(&n.faculty_id, &item.stp_id) {
                    return Some((u.faculty_id.clone(), n.faculty_id.clone(), item));
                }
            }
        }
    }
    None
}

fn ingestion_idempotence() -> Check {
    let feed: Vec<Value> = (0..100)
        .map(|i| {
            json!({
                "title": format!("Regional Seminar {i:03}"),
                "provider": "CHED",
                "start_date": NaiveDate::from_ymd_opt(2025, 1, 1).unwrap() + chrono::Days::new(i),
                "description": if i % 2 == 0 { "Tax compliance update" } else { "Campus network security" },
            })
        })
        .collect();
    let bytes = serde_json::to_vec(&feed).unwrap();
    let vocab = TagVocabulary::from_json(br#"{"taxation": ["tax"], "networking": ["network"]}"#).unwrap();
    let mut store = Store::in_memory(StateSnapshot::default()).map_err(|e| e.to_string())?;
    let now = Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0).unwrap();
    let first = ingest_feed(&bytes, FeedFormat::JsonArray, &vocab, &mut store, "acceptance", now).map_err(|e| e.to_string())?;
    ensure(first.added == 100 && first.duplicates_skipped == 0, || format!("first {first:?}"))?;
    let catalog = serde_json::to_vec(store.list_items()).unwrap();
    let later = now + chrono::Duration::days(1);
    let second = ingest_feed(&bytes, FeedFormat::JsonArray, &vocab, &mut store, "acceptance", later).map_err(|e| e.to_string())?;
    ensure(second.added == 0 && second.duplicates_skipped == 100, || format!("second {second:?}"))?;
    ensure(serde_json::to_vec(store.list_items()).unwrap() == catalog, || "catalog bytes changed".into())?;
    Ok("added 100, then 0 with 100 duplicates, catalog byte-identical".into())
}

fn persistence() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("state.json");
    for seed in 0..20 {
        let (state, _) = random_case(5_000 + seed, 5, 10);
        save_state(&state, &path).map_err(|e| e.to_string())?;
        let loaded = load_state(&path).map_err(|e| e.to_string())?.ok_or("missing after save")?;
        ensure(loaded == state.clone().canonical(), || format!("seed {seed}: round trip differs"))?;
        ensure(loaded.to_canonical_bytes() == std::fs::read(&path).unwrap(), || format!("seed {seed}: bytes differ"))?;
    }
    let prior = load_state(&path).map_err(|e| e.to_string())?.ok_or("missing")?;
    let (next, _) = random_case(9_999, 5, 10);
    let crashed = write_atomic_with(&path, &next.to_canonical_bytes(), |_| Err(std::io::Error::other("simulated crash")));
    ensure(crashed.is_err(), || "interrupted write reported success".into())?;
    let after = load_state(&path).map_err(|e| e.to_string())?.ok_or("snapshot lost")?;
    ensure(after == prior, || "prior snapshot not intact".into())?;
    let stray = std::fs::read_dir(dir.path()).unwrap().count();
    ensure(stray == 1, || format!("{stray} files left in the data directory"))?;
    Ok("20 round trips, prior snapshot survives interrupted write".into())
}

fn evaluation_lift() -> Check {
    let state = generate_population(&SyntheticSpec::new(42, 50, 200, 4, 0.5)).map_err(|e| e.to_string())?;
    let r = leave_one_out(&state, &RecommendParams::default(), 5, Exec::default()).map_err(|e| e.to_string())?;
    ensure(r.hit_rate >= 2.0 * r.random_baseline, || format!("{r:?}"))?;
    ensure(r.n_trials == 50 && (r.hit_rate - 0.24).abs() < 1e-12, || format!("regression value moved: {r:?}"))?;
    Ok(format!(
        "hit_rate {:.4} vs baseline {:.4} (lift {:.2}, {} trials)",
        r.hit_rate, r.random_baseline, r.lift, r.n_trials
    ))
}

async fn call(app: &axum::Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let body = body.map(|b| Body::from(serde_json::to_vec(&b).unwrap())).unwrap_or_else(Body::empty);
    let req = Request::builder().method(method).uri(uri).body(body).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn api_contract() -> Check {
    let clock = Arc::new(|| Utc.with_ymd_and_hms(2025, 6, 1, 9, 0, 0).unwrap());
    let store = Store::in_memory(StateSnapshot::default()).map_err(|e| e.to_string())?;
    let app = Arc::new(AppState::new(store, TagVocabulary::default(), RecommendParams::default()).with_clock(clock));
    let app = router(app);

    let (s, j) = call(&app, Method::POST, "/api/faculty", Some(serde_json::to_value(josh_input()).unwrap())).await;
    ensure(s == StatusCode::CREATED, || format!("create Josh: {s} {j}"))?;
    let (s, b) = call(&app, Method::POST, "/api/faculty", Some(serde_json::to_value(benjie_input()).unwrap())).await;
    ensure(s == StatusCode::CREATED, || format!("create Benjie: {s} {b}"))?;
    let (josh_id, benjie_id) = (j["faculty_id"].as_str().unwrap(), b["faculty_id"].as_str().unwrap());

    let feed = json!([
        {"title": "Finance Forum", "provider": "CHED", "start_date": "2025-07-10", "explicit_tags": ["finance"]},
        {"title": "Tax Update", "provider": "CHED", "start_date": "2025-07-15", "explicit_tags": ["accounting", "taxation"]},
        {"title": "Network Security", "provider": "CHED", "start_date": "2025-07-20", "explicit_tags": ["networking"]}
    ]);
    let (s, report) = call(&app, Method::POST, "/api/admin/ingest", Some(feed)).await;
    ensure(s == StatusCode::OK && report["added"] == 3, || format!("ingest: {s} {report}"))?;
    let (_, items) = call(&app, Method::GET, "/api/stp", None).await;
    let forum = items
        .as_array()
        .and_then(|a| a.iter().find(|i| i["title"] == "Finance Forum"))
        .and_then(|i| i["stp_id"].as_str())
        .ok_or("Finance Forum not in catalog")?
        .to_string();

    let like_uri = format!("/api/faculty/{benjie_id}/likes");
    let (s, _) = call(&app, Method::POST, &like_uri, Some(json!({"stp_id": forum}))).await;
    ensure(s == StatusCode::CREATED, || format!("like: {s}"))?;

    let (s, feed) = call(&app, Method::GET, &format!("/api/faculty/{josh_id}/recommendations"), None).await;
    ensure(s == StatusCode::OK, || format!("recommendations: {s}"))?;
    let got: Vec<(String, f64)> = feed["recommendations"]
        .as_array()
        .ok_or("no recommendations array")?
        .iter()
        .map(|r| (r["title"].as_str().unwrap_or("").to_string(), r["score"].as_f64().unwrap_or(f64::NAN)))
        .collect();
    let ok = got.len() == 2
        && got[0].0 == "Finance Forum"
        && (got[0].1 - 1.0).abs() < 1e-9
        && got[1].0 == "Tax Update"
        && (got[1].1 - 0.25).abs() < 1e-9;
    ensure(ok, || format!("feed {got:?}"))?;

    let (s, err) = call(&app, Method::POST, &like_uri, Some(json!({"stp_id": forum}))).await;
    ensure(s == StatusCode::CONFLICT && err["code"] == "duplicate", || format!("repeat like: {s} {err}"))?;
    Ok("Finance Forum 1.0, Tax Update 0.25, repeat like 409".into())
}

fn main() -> ExitCode {
    let rt = tokio::runtime::Runtime::new().expect("runtime");
    let criteria: Vec<Criterion> = vec![
        ("survey arithmetic", 1, Box::new(survey_arithmetic)),
        ("similarity fixture", 1, Box::new(similarity_fixture)),
        ("oracle equivalence", 30, Box::new(oracle_equivalence)),
        ("like propagation", 10, Box::new(like_propagation)),
        ("ingestion idempotence", 5, Box::new(ingestion_idempotence)),
        ("persistence round-trip and crash safety", 10, Box::new(persistence)),
        ("evaluation lift", 60, Box::new(evaluation_lift)),
        ("API contract", 10, Box::new(move || rt.block_on(api_contract()))),
    ];
    let mut failed = 0;
    for (name, budget, check) in &criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > Duration::from_secs(*budget) => Err(format!("took {elapsed:.2?}, budget {budget}s")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{elapsed:.2?}]");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
