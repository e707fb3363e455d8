mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use cnnexplain::service::{live_aggregate, router, NextQuestion, ServiceConfig, StudyService, Submission, RATER_HEADER};
use cnnexplain::study::{read_jsonl, Answer, CategoryScheme, Choice, ModelSide, Task};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

fn open(dir: &std::path::Path, per_task: usize, raters: usize) -> StudyService {
    let config = ServiceConfig {
        raters_per_question: raters,
        ..Default::default()
    };
    StudyService::open(common::bank(per_task), config, dir).unwrap()
}

fn question_id(n: NextQuestion) -> String {
    match n {
        NextQuestion::Question { question } => question.id,
        NextQuestion::Done => panic!("bank exhausted"),
    }
}

fn answer_for(task: Task) -> Choice {
    match task {
        Task::One => Choice::Model(ModelSide::A),
        _ => Choice::Class(1),
    }
}

#[test]
fn least_answered_first_and_no_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path(), 2, 3);
    let a = svc.register_rater().unwrap();
    let b = svc.register_rater().unwrap();
    let qa = question_id(svc.next_question(&a, Some(Task::Two), 0).unwrap());
    let qb = question_id(svc.next_question(&b, Some(Task::Two), 0).unwrap());
    // both questions start at zero load, so the second rater gets the other one
    assert_ne!(qa, qb);
    let sub = |q: &str| Submission {
        question_id: q.to_string(),
        choice: Choice::Class(0),
        confident: true,
    };
    svc.submit(&a, sub(&qa), 1).unwrap();
    let again = question_id(svc.next_question(&a, Some(Task::Two), 2).unwrap());
    assert_ne!(again, qa);
    svc.submit(&a, sub(&again), 3).unwrap();
    assert_eq!(svc.next_question(&a, Some(Task::Two), 4).unwrap(), NextQuestion::Done);
}

#[test]
fn full_question_is_never_reissued() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path(), 1, 3);
    let raters: Vec<String> = (0..4).map(|_| svc.register_rater().unwrap()).collect();
    for r in &raters[..3] {
        let q = question_id(svc.next_question(r, Some(Task::One), 0).unwrap());
        svc.submit(r, Submission { question_id: q, choice: Choice::NoPreference, confident: false }, 1).unwrap();
    }
    assert_eq!(svc.answer_count("t1-000"), 3);
    assert_eq!(svc.next_question(&raters[3], Some(Task::One), 2).unwrap(), NextQuestion::Done);
}

#[test]
fn open_slots_are_reserved_until_expiry() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path(), 1, 1);
    let a = svc.register_rater().unwrap();
    let b = svc.register_rater().unwrap();
    let q = question_id(svc.next_question(&a, Some(Task::Two), 0).unwrap());
    assert_eq!(svc.next_question(&b, Some(Task::Two), 10).unwrap(), NextQuestion::Done);
    let ttl = svc.config().assignment_ttl;
    assert_eq!(question_id(svc.next_question(&b, Some(Task::Two), ttl + 1).unwrap()), q);
    let late = svc.submit(&a, Submission { question_id: q.clone(), choice: Choice::Class(1), confident: true }, ttl + 2);
    assert!(late.is_err());
    svc.submit(&b, Submission { question_id: q, choice: Choice::Class(1), confident: true }, ttl + 3).unwrap();
}

#[test]
fn rejections_leave_the_log_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path(), 1, 3);
    let a = svc.register_rater().unwrap();
    let unassigned = svc.submit(&a, Submission { question_id: "t3-000".into(), choice: Choice::Class(0), confident: true }, 0);
    assert!(unassigned.is_err());
    let q = question_id(svc.next_question(&a, Some(Task::Three), 0).unwrap());
    let nopref = svc.submit(&a, Submission { question_id: q.clone(), choice: Choice::NoPreference, confident: false }, 1);
    assert!(nopref.unwrap_err().to_string().contains("no-preference"));
    let ok = svc.submit(&a, Submission { question_id: q.clone(), choice: Choice::Class(0), confident: true }, 2).unwrap();
    let log_path = dir.path().join("answers.jsonl");
    let before = std::fs::read(&log_path).unwrap();
    let dup = svc.submit(&a, Submission { question_id: q, choice: Choice::Class(1), confident: true }, 3);
    assert!(dup.is_err());
    assert_eq!(std::fs::read(&log_path).unwrap(), before);
    let stored: Vec<Answer> = read_jsonl(&log_path).unwrap();
    assert_eq!(stored, [ok.clone()]);
    assert_eq!(format!("{}\n", serde_json::to_string(&ok).unwrap()).into_bytes(), before);
}

#[test]
fn log_replay_restores_state() {
    let dir = tempfile::tempdir().unwrap();
    let (rater, answered) = {
        let svc = open(dir.path(), 3, 3);
        let r = svc.register_rater().unwrap();
        let q = question_id(svc.next_question(&r, Some(Task::One), 0).unwrap());
        svc.submit(&r, Submission { question_id: q.clone(), choice: answer_for(Task::One), confident: true }, 1).unwrap();
        (r, q)
    };
    let svc = open(dir.path(), 3, 3);
    assert!(svc.is_rater(&rater));
    assert_eq!(svc.answers().len(), 1);
    assert_eq!(svc.answer_count(&answered), 1);
    let next = question_id(svc.next_question(&rater, Some(Task::One), 5).unwrap());
    assert_ne!(next, answered);
}

#[test]
fn export_grows_and_matches_offline() {
    let dir = tempfile::tempdir().unwrap();
    let svc = open(dir.path(), 9, 2);
    let empty = svc.export().unwrap();
    assert!(empty.answers.is_empty());
    assert!(empty.tasks.iter().all(|t| t.table.rows.iter().all(|r| r.all.mean.is_none())));
    let raters: Vec<String> = (0..2).map(|_| svc.register_rater().unwrap()).collect();
    let mut previous = Vec::new();
    let mut now = 0;
    for task in Task::ALL {
        for r in &raters {
            while let NextQuestion::Question { question } = svc.next_question(r, Some(task), now).unwrap() {
                now += 1;
                let confident = now % 3 != 0;
                svc.submit(r, Submission { question_id: question.id, choice: answer_for(task), confident }, now).unwrap();
                let export = svc.export().unwrap();
                assert!(export.answers.starts_with(&previous));
                previous = export.answers;
            }
        }
    }
    let export = svc.export().unwrap();
    assert_eq!(export.answers.len(), 27 * 2);
    let offline = live_aggregate(svc.questions(), &read_jsonl(dir.path().join("answers.jsonl")).unwrap(), CategoryScheme::WithConfidence).unwrap();
    assert_eq!(offline, export.tasks);
}

async fn body_json(resp: axum::response::Response) -> Value {
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    serde_json::from_slice(&bytes).unwrap()
}

#[tokio::test]
async fn http_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let svc = Arc::new(open(dir.path(), 2, 3));
    let app = router(svc.clone());

    let resp = app.clone().oneshot(Request::get("/session").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let token = body_json(resp).await["rater_token"].as_str().unwrap().to_string();

    let resp = app.clone().oneshot(Request::get("/questions/next?task=2").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(resp.status(), StatusCode::UNAUTHORIZED);

    let next = Request::get("/questions/next?task=2").header(RATER_HEADER, &token).body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(next).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let q = body_json(resp).await;
    assert_eq!(q["status"], "question");
    let text = q.to_string();
    assert!(!text.contains("hidden_key") && !text.contains("doc_id") && !text.contains("stratum"), "{text}");
    assert!(q["question"]["payload"].get("text").is_none());
    let qid = q["question"]["id"].as_str().unwrap().to_string();

    let post = |body: Value| {
        Request::post("/answers")
            .header(RATER_HEADER, &token)
            .header("content-type", "application/json")
            .body(Body::from(body.to_string()))
            .unwrap()
    };
    let body = serde_json::json!({ "question_id": qid, "choice": { "class": 1 }, "confident": true });
    let resp = app.clone().oneshot(post(body.clone())).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let resp = app.clone().oneshot(post(body)).await.unwrap();
    assert_eq!(resp.status(), StatusCode::CONFLICT);

    let resp = app.clone().oneshot(Request::get("/questions/next?task=9").header(RATER_HEADER, &token).body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);

    let resp = app.oneshot(Request::get("/results").body(Body::empty()).unwrap()).await.unwrap();
    let results = body_json(resp).await;
    assert_eq!(results["answers"].as_array().unwrap().len(), 1);
    assert!(!results.to_string().contains("hidden_key"));
}
