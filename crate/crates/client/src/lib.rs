//! Typed client for the formsense HTTP service.
//!
//! Every method maps one endpoint. Non-2xx responses become
//! [`ClientError::Api`] carrying the status and the decoded error body.

use formsense_core::api::{
    AnalyzeRequest, AppealBody, Comparison, ComparisonRecorded, Coverage, CreateSession, ErrorBody, RulesBody,
};
use formsense_core::model::{AppealScores, ProductId, Rule, RuleAssessmentSet, Session, StageState};
use formsense_core::pipeline::PipelineReport;
use reqwest::{Method, RequestBuilder, Url};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("invalid base URL `{0}`")]
    BaseUrl(String),
    #[error(transparent)]
    Http(#[from] reqwest::Error),
    #[error("{status}: {}", .body.message)]
    Api { status: u16, body: ErrorBody },
    #[error("unexpected response body: {0}")]
    Decode(#[from] serde_json::Error),
}

impl ClientError {
    pub fn status(&self) -> Option<u16> {
        match self {
            ClientError::Api { status, .. } => Some(*status),
            ClientError::Http(e) => e.status().map(|s| s.as_u16()),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    http: reqwest::Client,
    base: Url,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: &str) -> Result<Self> {
        let mut base = Url::parse(base).map_err(|_| ClientError::BaseUrl(base.to_string()))?;
        if base.cannot_be_a_base() {
            return Err(ClientError::BaseUrl(base.to_string()));
        }
        if !base.path().ends_with('/') {
            let path = format!("{}/", base.path());
            base.set_path(&path);
        }
        Ok(Self { http: reqwest::Client::new(), base })
    }

    fn url(&self, path: &str) -> Url {
        self.base.join(path.trim_start_matches('/')).expect("relative paths join onto a base URL")
    }

    fn request(&self, method: Method, path: &str) -> RequestBuilder {
        self.http.request(method, self.url(path))
    }

    async fn send(&self, req: RequestBuilder) -> Result<reqwest::Response> {
        let resp = req.send().await?;
        let status = resp.status();
        if status.is_success() {
            return Ok(resp);
        }
        let text = resp.text().await?;
        let body = serde_json::from_str(&text).unwrap_or(ErrorBody {
            error: "unknown".into(),
            message: text,
            under_covered: None,
        });
        Err(ClientError::Api { status: status.as_u16(), body })
    }

    async fn json<T: DeserializeOwned>(&self, req: RequestBuilder) -> Result<T> {
        let bytes = self.send(req).await?.bytes().await?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    async fn json_body<B: Serialize + ?Sized, T: DeserializeOwned>(&self, method: Method, path: &str, body: &B) -> Result<T> {
        self.json(self.request(method, path).json(body)).await
    }

    pub async fn health(&self) -> Result<()> {
        self.send(self.request(Method::GET, "health")).await.map(|_| ())
    }

    pub async fn create_session(&self, req: &CreateSession) -> Result<Session> {
        self.json_body(Method::POST, "sessions", req).await
    }

    pub async fn session(&self, id: &str) -> Result<Session> {
        self.json(self.request(Method::GET, &format!("sessions/{id}"))).await
    }

    pub async fn record_comparison(&self, id: &str, i: ProductId, j: ProductId, value: u8) -> Result<ComparisonRecorded> {
        let body = Comparison { i: i as i64, j: j as i64, value: value.into() };
        self.json_body(Method::POST, &format!("sessions/{id}/comparisons"), &body).await
    }

    pub async fn coverage(&self, id: &str) -> Result<Coverage> {
        self.json(self.request(Method::GET, &format!("sessions/{id}/coverage"))).await
    }

    pub async fn complete_stage1(&self, id: &str) -> Result<Session> {
        self.json(self.request(Method::POST, &format!("sessions/{id}/stage1/complete"))).await
    }

    pub async fn set_appeal(&self, id: &str, scores: &AppealScores) -> Result<Session> {
        let body: AppealBody = scores.iter().map(|(p, s)| (p.to_string(), s)).collect();
        self.json_body(Method::PUT, &format!("sessions/{id}/appeal"), &body).await
    }

    pub async fn set_rules(&self, id: &str, rules: &RuleAssessmentSet) -> Result<Session> {
        let body: RulesBody = rules.iter().map(|(p, r)| (p.to_string(), r.map(i64::from))).collect();
        self.json_body(Method::PUT, &format!("sessions/{id}/rules"), &body).await
    }

    pub async fn analyze(&self, id: &str, req: AnalyzeRequest) -> Result<PipelineReport> {
        self.json_body(Method::POST, &format!("sessions/{id}/analyze"), &req).await
    }

    /// Profile SVG of a product, optionally after `rule` (with the server's
    /// default step when `delta` is `None`).
    pub async fn profile_svg(
        &self,
        product: ProductId,
        rule: Option<(Rule, Option<f64>)>,
        session: Option<&str>,
    ) -> Result<String> {
        let mut url = self.url(&format!("products/{product}/profile.svg"));
        {
            let mut q = url.query_pairs_mut();
            if let Some((rule, delta)) = rule {
                q.append_pair("rule", &rule.to_string());
                if let Some(d) = delta {
                    q.append_pair("delta", &d.to_string());
                }
            }
            if let Some(s) = session {
                q.append_pair("session", s);
            }
        }
        let url = if url.query() == Some("") { self.url(&format!("products/{product}/profile.svg")) } else { url };
        Ok(self.send(self.http.get(url)).await?.text().await?)
    }

    /// Recreates `session` on the server stage by stage, as a subject would
    /// have entered it. Stops at the first stage the session has not reached.
    pub async fn upload(&self, session: &Session) -> Result<Session> {
        let create = CreateSession {
            id: Some(session.id.clone()),
            dims: session.products.iter().map(|p| p.dims).collect(),
            labels: Some(session.products.iter().map(|p| p.label.clone()).collect()),
        };
        self.create_session(&create).await?;
        for (i, j, value) in session.comparisons.iter() {
            self.record_comparison(&session.id, i, j, value).await?;
        }
        if session.stages.stage1 == StageState::Complete {
            self.complete_stage1(&session.id).await?;
        }
        if let Some(scores) = &session.appeal {
            self.set_appeal(&session.id, scores).await?;
        }
        if let Some(rules) = &session.rules {
            self.set_rules(&session.id, rules).await?;
        }
        self.session(&session.id).await
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_url_gets_a_trailing_slash() {
        let c = Client::new("http://localhost:8080/api").unwrap();
        assert_eq!(c.url("sessions/a").as_str(), "http://localhost:8080/api/sessions/a");
        let c = Client::new("http://localhost:8080").unwrap();
        assert_eq!(c.url("/health").as_str(), "http://localhost:8080/health");
        assert!(Client::new("not a url").is_err());
    }
}
