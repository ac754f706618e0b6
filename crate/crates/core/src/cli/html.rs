//! Self-contained HTML rendering (inline styles, no external assets). The
//! output is kept XML-well-formed so it is machine-checkable.

use std::fmt::Write as _;

use crate::explain::Explanation;

use super::AnnotatedParagraph;

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

fn page(title: &str, body: &str) -> String {
    format!(
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"/><title>{}</title></head>\n<body>\n{}</body></html>\n",
        escape(title),
        body
    )
}

/// One paragraph, one span, colored by predicted label, confidence in the
/// tooltip.
pub fn render_highlight<'a>(units: &[AnnotatedParagraph], color_for: impl Fn(u8) -> &'a str) -> String {
    let mut body = String::from("<div>\n");
    for unit in units {
        let _ = writeln!(
            body,
            "<p><span style=\"background-color:{};padding:2px\" title=\"label {} — confidence (uncalibrated): {:.3}\">{}</span></p>",
            color_for(unit.label),
            unit.label,
            unit.confidence,
            escape(&unit.text)
        );
    }
    body.push_str("</div>\n");
    page("highlighted paragraphs", &body)
}

/// The explained text with each attributed token colored by the sign of its
/// contribution and shaded by its relative magnitude, plus a ranked legend.
pub fn render_explanation(text: &str, explanation: &Explanation) -> String {
    let max_weight = explanation
        .tokens
        .iter()
        .map(|t| t.weight.abs())
        .fold(0.0f64, f64::max);
    let style_of = |token: &str| -> Option<String> {
        let hit = explanation
            .tokens
            .iter()
            .find(|t| t.token.eq_ignore_ascii_case(token))?;
        let intensity = if max_weight > 0.0 {
            (hit.weight.abs() / max_weight * 170.0) as u8 + 40
        } else {
            40
        };
        let color = if hit.weight >= 0.0 {
            format!("rgba(46,125,50,{:.2})", intensity as f64 / 255.0)
        } else {
            format!("rgba(198,40,40,{:.2})", intensity as f64 / 255.0)
        };
        Some(format!("background-color:{color}"))
    };

    let mut body = String::from("<div>\n<p>");
    for (i, token) in text.split_whitespace().enumerate() {
        if i > 0 {
            body.push(' ');
        }
        match style_of(&crate::text::normalize(token)) {
            Some(style) => {
                let _ = write!(body, "<span style=\"{style}\">{}</span>", escape(token));
            }
            None => body.push_str(&escape(token)),
        }
    }
    body.push_str("</p>\n");
    let _ = writeln!(
        body,
        "<p>label {} — method {:?}</p>",
        explanation.label, explanation.method
    );
    body.push_str("<ol>\n");
    for t in &explanation.tokens {
        let _ = writeln!(body, "<li>{} {:+.6}</li>", escape(&t.token), t.weight);
    }
    body.push_str("</ol>\n</div>\n");
    page("token attributions", &body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::{ExplainMethod, TokenWeight};

    fn is_well_formed(html: &str) -> bool {
        let mut reader = quick_xml::Reader::from_str(html);
        loop {
            match reader.read_event() {
                Ok(quick_xml::events::Event::Eof) => return true,
                Ok(_) => {}
                Err(_) => return false,
            }
        }
    }

    #[test]
    fn highlight_html_is_well_formed_with_one_span_per_paragraph() {
        let units = vec![
            AnnotatedParagraph {
                text: "a < b & c".into(),
                label: 1,
                scores: vec![0.1, 0.8, 0.1],
                confidence: 0.8,
            },
            AnnotatedParagraph {
                text: "plain \"quoted\" text".into(),
                label: 0,
                scores: vec![0.9, 0.05, 0.05],
                confidence: 0.9,
            },
        ];
        let html = render_highlight(&units, |_| "#e0e0e0");
        assert!(is_well_formed(&html), "html not well formed:\n{html}");
        assert_eq!(html.matches("<span").count(), units.len());
        assert!(html.contains("&lt; b &amp; c"));
    }

    #[test]
    fn explanation_html_is_well_formed() {
        let explanation = Explanation {
            label: 2,
            method: ExplainMethod::Linear,
            tokens: vec![
                TokenWeight {
                    token: "problem".into(),
                    weight: -0.5,
                },
                TokenWeight {
                    token: "device".into(),
                    weight: 0.25,
                },
            ],
        };
        let html = render_explanation("The problem with this device", &explanation);
        assert!(is_well_formed(&html), "html not well formed:\n{html}");
        assert!(html.contains("problem"));
    }
}
