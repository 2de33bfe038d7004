//! CoNLL column format reader and writer.

use super::{normalize_iob1, CorpusError, Dataset, Sentence, Tag, Token};

const DOCSTART: &str = "-DOCSTART-";

/// Which whitespace-separated columns hold the token and the tag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConllColumns {
    pub token: usize,
    /// `None` selects the last column of each line.
    pub tag: Option<usize>,
}

impl ConllColumns {
    pub fn new(token: usize, tag: usize) -> Self {
        ConllColumns {
            token,
            tag: Some(tag),
        }
    }
}

/// Parses CoNLL text into a BIO2-normalized dataset.
///
/// Blank lines end sentences; a line whose first column is `-DOCSTART-`
/// starts a new document and never becomes a token. Sentences receive the
/// document ordinal (`"0"`, `"1"`, ...) as `doc_id` once a marker was seen.
pub fn parse_conll(text: &str, columns: ConllColumns) -> Result<Dataset, CorpusError> {
    let mut sentences = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut tag_lines: Vec<usize> = Vec::new();
    let mut doc: Option<usize> = None;

    let mut flush = |current: &mut Vec<Token>,
                     tag_lines: &mut Vec<usize>,
                     doc: Option<usize>|
     -> Result<(), CorpusError> {
        if current.is_empty() {
            return Ok(());
        }
        let labels: Vec<&str> = current.iter().map(|t| t.label.as_str()).collect();
        let normalized = normalize_iob1(&labels).map_err(|e| match e {
            CorpusError::MalformedTag { position, tag } => CorpusError::MalformedTagAtLine {
                line: tag_lines[position],
                tag,
            },
            other => other,
        })?;
        for (tok, label) in current.iter_mut().zip(normalized) {
            tok.label = label;
        }
        sentences.push(Sentence {
            tokens: std::mem::take(current),
            doc_id: doc.map(|d| d.to_string()),
        });
        tag_lines.clear();
        Ok(())
    };

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            flush(&mut current, &mut tag_lines, doc)?;
            continue;
        }
        if fields[0] == DOCSTART {
            flush(&mut current, &mut tag_lines, doc)?;
            doc = Some(doc.map_or(0, |d| d + 1));
            continue;
        }
        let tag_col = match columns.tag {
            Some(c) => c,
            None => fields.len() - 1,
        };
        let mut expected = columns.token.max(tag_col) + 1;
        if columns.tag.is_none() {
            expected = expected.max(columns.token + 2);
        }
        if fields.len() < expected {
            return Err(CorpusError::MissingColumns {
                line: line_no,
                expected,
                found: fields.len(),
            });
        }
        let tag = fields[tag_col];
        if Tag::parse(tag).is_none() {
            return Err(CorpusError::MalformedTagAtLine {
                line: line_no,
                tag: tag.to_string(),
            });
        }
        current.push(Token::new(fields[columns.token], tag));
        tag_lines.push(line_no);
    }
    flush(&mut current, &mut tag_lines, doc)?;
    Dataset::new("", sentences)
}

/// Two columns (`token tag`), LF endings, one blank line between sentences,
/// trailing newline. A `-DOCSTART- O` block precedes each change of `doc_id`.
pub fn serialize_conll(dataset: &Dataset) -> String {
    let mut out = String::new();
    let mut prev_doc: Option<&str> = None;
    for (i, sentence) in dataset.sentences().iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        if let Some(doc) = sentence.doc_id.as_deref() {
            if prev_doc != Some(doc) {
                out.push_str(DOCSTART);
                out.push_str(" O\n\n");
            }
        }
        prev_doc = sentence.doc_id.as_deref();
        for tok in &sentence.tokens {
            out.push_str(&tok.text);
            out.push(' ');
            out.push_str(&tok.label);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synthesize_corpus, SynthConfig};

    #[test]
    fn parses_basic_example() {
        let ds = parse_conll("EU NNP B-ORG\n\nrejects VBZ O", ConllColumns::new(0, 2)).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.sentences()[0].labels(), vec!["B-ORG"]);
        assert_eq!(ds.sentences()[1].labels(), vec!["O"]);
        assert_eq!(ds.sentences()[1].tokens[0].text, "rejects");
    }

    #[test]
    fn empty_input_is_empty_dataset() {
        assert!(parse_conll("", ConllColumns::default()).unwrap().is_empty());
        assert!(parse_conll("\n\n\n", ConllColumns::default()).unwrap().is_empty());
    }

    #[test]
    fn short_line_reports_line_number() {
        let text = "a O\nb O\n\nc O\nd\n\ne O\n";
        let err = parse_conll(text, ConllColumns::new(0, 1)).unwrap_err();
        assert_eq!(
            err,
            CorpusError::MissingColumns {
                line: 5,
                expected: 2,
                found: 1
            }
        );
        // last-column mode also needs a separate tag column
        assert!(parse_conll(text, ConllColumns::default()).is_err());
    }

    #[test]
    fn bad_tag_is_an_error() {
        let err = parse_conll("a O\nb PER\n", ConllColumns::default()).unwrap_err();
        assert_eq!(
            err,
            CorpusError::MalformedTagAtLine {
                line: 2,
                tag: "PER".into()
            }
        );
    }

    #[test]
    fn docstart_and_iob1() {
        let text = "-DOCSTART- -X- -X- O\n\nEU NNP I-NP I-ORG\nrejects VBZ I-VP O\nGerman JJ I-NP I-MISC\n\n\
                    -DOCSTART- -X- -X- O\n\nPeter NNP I-NP I-PER\nBlackburn NNP I-NP I-PER\n";
        let ds = parse_conll(text, ConllColumns::default()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.sentences()[0].labels(), vec!["B-ORG", "O", "B-MISC"]);
        assert_eq!(ds.sentences()[1].labels(), vec!["B-PER", "I-PER"]);
        assert_eq!(ds.sentences()[0].doc_id.as_deref(), Some("0"));
        assert_eq!(ds.sentences()[1].doc_id.as_deref(), Some("1"));
        assert!(ds.sentences().iter().flat_map(|s| &s.tokens).all(|t| t.text != "-DOCSTART-"));
    }

    #[test]
    fn serialize_format() {
        let ds = Dataset::new(
            "d",
            vec![
                Sentence::from_pairs(&["a", "b"], &["B-X", "I-X"]),
                Sentence::from_pairs(&["c"], &["O"]),
            ],
        )
        .unwrap();
        assert_eq!(serialize_conll(&ds), "a B-X\nb I-X\n\nc O\n");
        assert_eq!(serialize_conll(&Dataset::empty("e")), "");
    }

    #[test]
    fn round_trip_with_documents() {
        let text = "-DOCSTART- O\n\na B-X\n\nb O\n\n-DOCSTART- O\n\nc B-Y\nd I-Y\n";
        let ds = parse_conll(text, ConllColumns::default()).unwrap();
        assert_eq!(serialize_conll(&ds), text);
        let again = parse_conll(&serialize_conll(&ds), ConllColumns::default()).unwrap();
        assert_eq!(again.sentences(), ds.sentences());
    }

    #[test]
    fn round_trip_synthetic() {
        let cfg = SynthConfig::new(200, 50, vec!["PER".into(), "LOC".into()], 3);
        let ds = synthesize_corpus(&cfg).unwrap();
        let text = serialize_conll(&ds);
        let back = parse_conll(&text, ConllColumns::default()).unwrap();
        assert_eq!(back.sentences(), ds.sentences());
        assert_eq!(serialize_conll(&back), text);
    }
}
