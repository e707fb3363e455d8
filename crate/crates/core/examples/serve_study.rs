//! Serves question banks over HTTP. Point it at the banks written by the
//! study_pipeline example, then:
//!
//!   curl localhost:8080/session
//!   curl -H "x-rater-token: TOKEN" localhost:8080/questions/next?task=2
//!   curl -H "x-rater-token: TOKEN" -H "content-type: application/json" \
//!        -d '{"question_id":"t2-000-lime","choice":{"class":1},"confident":true}' localhost:8080/answers
//!   curl localhost:8080/results
//!
//! cargo run --release --example serve_study -- BANK.jsonl... [--dir LOG_DIR]

use std::sync::Arc;

use cnnexplain::service::{serve, ServiceConfig, StudyService};
use cnnexplain::study::{read_jsonl, TaskQuestion};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut dir = std::env::temp_dir().join("cnnexplain-serve");
    let mut bank: Vec<TaskQuestion> = Vec::new();
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        if a == "--dir" {
            dir = args.next().ok_or("--dir needs a value")?.into();
        } else {
            bank.extend(read_jsonl::<TaskQuestion>(&a)?);
        }
    }
    if bank.is_empty() {
        return Err("no question banks given".into());
    }
    let service = StudyService::open(bank, ServiceConfig::default(), &dir)?;
    println!("{} questions, answer log in {}", service.questions().len(), dir.display());
    serve(Arc::new(service), "127.0.0.1:8080".parse()?).await?;
    Ok(())
}
