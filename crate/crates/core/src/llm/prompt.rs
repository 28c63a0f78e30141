use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CLASSES_SLOT: &str = "{classes}";
pub const DEFAULT_QUERY_SLOT: &str = "{text}";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub text: String,
    pub class: String,
}

/// Instruction line, worked examples, and the query block for the text
/// under evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptTemplate {
    /// May contain `{classes}`, replaced by the class names joined with " or ".
    pub instruction: String,
    pub exemplars: Vec<Exemplar>,
    /// Block appended last; must contain `query_slot` exactly once.
    pub query: String,
    pub query_slot: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self {
            instruction:
                "Classify the sentiment of the following text in the input tag as {classes}:".into(),
            exemplars: vec![
                Exemplar {
                    text: "I love you.".into(),
                    class: "positive".into(),
                },
                Exemplar {
                    text: "The product is bad.".into(),
                    class: "negative".into(),
                },
            ],
            query: "<input> {text}\n<output>".into(),
            query_slot: DEFAULT_QUERY_SLOT.into(),
        }
    }
}

impl PromptTemplate {
    /// The default template without worked examples.
    pub fn zero_shot() -> Self {
        Self {
            exemplars: Vec::new(),
            ..Self::default()
        }
    }

    pub fn validate<S: AsRef<str>>(&self, classes: &[S]) -> Result<()> {
        if self.query_slot.is_empty() || self.query.matches(&self.query_slot).count() != 1 {
            return Err(Error::Prompt(format!(
                "query block must contain `{}` exactly once",
                self.query_slot
            )));
        }
        for ex in &self.exemplars {
            if !classes.iter().any(|c| c.as_ref() == ex.class) {
                return Err(Error::Prompt(format!(
                    "exemplar class `{}` is not one of the corpus classes",
                    ex.class
                )));
            }
        }
        Ok(())
    }

    /// Render the full prompt for `text`. The text is spliced in verbatim,
    /// so slot markers inside it are never expanded.
    pub fn render<S: AsRef<str>>(&self, classes: &[S], text: &str) -> Result<String> {
        if text.trim().is_empty() {
            return Err(Error::Prompt("text to classify is empty".into()));
        }
        self.validate(classes)?;
        let joined = classes
            .iter()
            .map(AsRef::as_ref)
            .collect::<Vec<_>>()
            .join(" or ");
        let mut out = self.instruction.replace(CLASSES_SLOT, &joined);
        out.push('\n');
        for ex in &self.exemplars {
            out.push_str("<input> ");
            out.push_str(&ex.text);
            out.push_str("\n<output> ");
            out.push_str(&ex.class);
            out.push_str(".\n");
        }
        let (head, tail) = self
            .query
            .split_once(&self.query_slot)
            .expect("validated above");
        out.push_str(head);
        out.push_str(text);
        out.push_str(tail);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLASSES: [&str; 2] = ["positive", "negative"];

    #[test]
    fn default_template_shape() {
        let p = PromptTemplate::default()
            .render(&CLASSES, "Great movie.")
            .unwrap();
        assert_eq!(
            p,
            "Classify the sentiment of the following text in the input tag as positive or negative:\n\
             <input> I love you.\n<output> positive.\n\
             <input> The product is bad.\n<output> negative.\n\
             <input> Great movie.\n<output>"
        );
        assert!(p.ends_with("<input> Great movie.\n<output>"));
    }

    #[test]
    fn zero_shot_has_only_the_query() {
        let p = PromptTemplate::zero_shot().render(&CLASSES, "meh").unwrap();
        assert_eq!(p.matches("<input>").count(), 1);
        assert!(p.ends_with("\n<input> meh\n<output>"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let t = PromptTemplate::default();
        assert_eq!(
            t.render(&CLASSES, "x y z").unwrap().into_bytes(),
            t.render(&CLASSES, "x y z").unwrap().into_bytes()
        );
    }

    #[test]
    fn slot_text_is_not_reexpanded() {
        let p = PromptTemplate::zero_shot()
            .render(&CLASSES, "{text} {classes}")
            .unwrap();
        assert!(p.ends_with("<input> {text} {classes}\n<output>"));
    }

    #[test]
    fn errors() {
        let t = PromptTemplate::default();
        assert!(t.render(&CLASSES, "   ").is_err());
        assert!(t.render(&["neg", "pos"], "fine").is_err());
        let bad = PromptTemplate {
            query: "<input>\n<output>".into(),
            ..PromptTemplate::zero_shot()
        };
        assert!(bad.render(&CLASSES, "fine").is_err());
    }
}
