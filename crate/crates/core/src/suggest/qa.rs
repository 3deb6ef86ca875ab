use super::papers_block;
use crate::error::{Error, Result};
use crate::gateway::ask_json;
use crate::graph::{ChatMessage, ChatRole};
use crate::prompt::{format_ideas_context, CitedText, ContextBundle, TemplateId};
use crate::Studio;
use serde_json::json;

impl Studio {
    /// Answers a free-form question against the collection and the whole
    /// canvas. Both turns are appended to the project's chat history.
    pub fn answer_question(&self, project_id: &str, prompt: &str) -> Result<CitedText> {
        if prompt.trim().is_empty() {
            return Err(Error::EmptyPrompt);
        }
        let snapshot = self.project(project_id)?;
        let bundle = ContextBundle::new()
            .papers(papers_block(&snapshot))
            .ideas(format_ideas_context(&snapshot.nodes, &snapshot.edges))
            .with("user_prompt", prompt);
        let reply = self.with_session(project_id, |s| {
            ask_json(self.gateway(), s, TemplateId::QaResponse, &bundle)?.require_in_range()
        })?;
        let answer = reply.value["litReviewResponse"].as_str().unwrap_or_default().to_string();

        self.commit_generation(project_id, snapshot.revision, |p, stale| {
            let cited = CitedText::new(answer.clone(), p);
            p.chat_history.push(ChatMessage {
                role: ChatRole::User,
                text: prompt.to_string(),
            });
            p.chat_history.push(ChatMessage {
                role: ChatRole::Assistant,
                text: answer.clone(),
            });
            self.log(
                p,
                "answer_question",
                json!({
                    "danglingCitations": cited.dangling,
                    "repairs": reply.repairs_applied,
                    "contextStale": stale,
                }),
            );
            Ok(cited)
        })
    }
}
