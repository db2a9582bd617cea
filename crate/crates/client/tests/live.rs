//! Client against a live service bound to an ephemeral port.

use formsense_client::{Client, ClientError};
use formsense_core::api::{AnalyzeRequest, CreateSession};
use formsense_core::fixtures;
use formsense_core::model::{Rule, StageState};
use formsense_core::pipeline::{run_pipeline, PipelineInputs, PipelineOptions};
use formsense_service::Config;

async fn start() -> (Client, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let addr = formsense_service::spawn(
        "127.0.0.1:0".parse().unwrap(),
        Config { data_dir: dir.path().to_path_buf(), static_dir: None },
    )
    .await
    .unwrap();
    let client = Client::new(&format!("http://{addr}")).unwrap();
    client.health().await.unwrap();
    (client, dir)
}

#[tokio::test]
async fn staged_protocol_round_trip() {
    let (client, _dir) = start().await;
    let dims = fixtures::dims().into_values().collect();
    let session = client.create_session(&CreateSession { id: Some("live".into()), dims, labels: None }).await.unwrap();
    assert_eq!(session.n(), 18);

    let rec = client.record_comparison("live", 1, 7, 0).await.unwrap();
    assert_eq!((rec.i, rec.j, rec.value), (1, 7, 0));
    assert_eq!(client.session("live").await.unwrap().comparisons.get(1, 7), Some(0));

    let err = client.set_appeal("live", &fixtures::appeal()).await.unwrap_err();
    assert_eq!(err.status(), Some(409));

    let err = client.complete_stage1("live").await.unwrap_err();
    match err {
        ClientError::Api { status, body } => {
            assert_eq!(status, 409);
            assert_eq!(body.under_covered.unwrap().len(), 18);
        }
        other => panic!("{other}"),
    }

    for (i, j, v) in fixtures::matrix().iter() {
        client.record_comparison("live", i, j, v).await.unwrap();
    }
    assert!(client.coverage("live").await.unwrap().complete);
    assert_eq!(client.complete_stage1("live").await.unwrap().stages.stage1, StageState::Complete);
    client.set_appeal("live", &fixtures::appeal()).await.unwrap();
    let done = client.set_rules("live", &fixtures::rules()).await.unwrap();
    assert!(done.is_complete());

    let report = client.analyze("live", AnalyzeRequest::default()).await.unwrap();
    let local = run_pipeline(&PipelineInputs::bundled(), &PipelineOptions::default()).unwrap().0;
    assert_eq!(report, local);
}

#[tokio::test]
async fn upload_reproduces_a_session_file() {
    let (client, dir) = start().await;
    let session = fixtures::session("uploaded");
    let remote = client.upload(&session).await.unwrap();
    assert_eq!(remote.comparisons, session.comparisons);
    assert_eq!(remote.appeal, session.appeal);
    assert_eq!(remote.rules, session.rules);
    assert_eq!(remote.stages, session.stages);
    assert!(dir.path().join("uploaded/session.json").is_file());
    assert_eq!(client.upload(&session).await.unwrap_err().status(), Some(409));
}

#[tokio::test]
async fn profiles_and_errors() {
    let (client, _dir) = start().await;
    let plain = client.profile_svg(7, None, None).await.unwrap();
    let taller = client.profile_svg(7, Some((Rule::R2, Some(1.0))), None).await.unwrap();
    assert!(plain.contains("<svg"));
    assert_ne!(plain, taller);
    assert_eq!(client.profile_svg(99, None, None).await.unwrap_err().status(), Some(404));
    assert_eq!(client.profile_svg(7, Some((Rule::R3, Some(-2.0))), None).await.unwrap_err().status(), Some(422));
    assert_eq!(client.session("missing").await.unwrap_err().status(), Some(404));
    assert_eq!(client.analyze("missing", AnalyzeRequest::default()).await.unwrap_err().status(), Some(404));
}
