//! Line-oriented text model files.
//!
//! ```text
//! netlines-model 1
//! kind ensemble
//! inputs 4
//! class 0 Iris-setosa
//! ...
//! tons 3
//! ton 0 2 1
//! network
//! hidden 2
//! ls_flag false
//! means ...
//! deviations ...
//! unit w0 w1 ... wN
//! output W0 W1 ... WH
//! end
//! ```
//!
//! Floats are written with 17 significant digits, so reading a file and
//! writing it again reproduces it byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use netlines_core::multiclass::{ton_predict, vote_predict, wta_predict, Ton, TonEnsemble, WtaClassifier};
use netlines_core::{ClassId, Dataset, NetLinesNetwork, PerceptronWeights, Standardizer};

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;

/// Binary network; `negative` is `None` when every class other than
/// `positive` is lumped together.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryModel {
    pub network: NetLinesNetwork,
    pub positive: ClassId,
    pub negative: Option<ClassId>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Binary(BinaryModel),
    Ton(Ton),
    Ensemble(TonEnsemble),
    Wta(WtaClassifier),
}

impl Classifier {
    pub fn kind(&self) -> &'static str {
        match self {
            Classifier::Binary(_) => "binary",
            Classifier::Ton(_) => "ton",
            Classifier::Ensemble(_) => "ensemble",
            Classifier::Wta(_) => "wta",
        }
    }

    pub fn networks(&self) -> Vec<&NetLinesNetwork> {
        match self {
            Classifier::Binary(b) => vec![&b.network],
            Classifier::Ton(t) => t.chain().iter().collect(),
            Classifier::Ensemble(e) => e.tons().iter().flat_map(|t| t.chain()).collect(),
            Classifier::Wta(w) => w.networks().iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub inputs: usize,
    pub classes: Vec<(ClassId, String)>,
    pub classifier: Classifier,
}

impl ModelFile {
    pub fn class_name(&self, id: ClassId) -> String {
        self.classes
            .iter()
            .find(|(c, _)| *c == id)
            .map_or_else(|| id.to_string(), |(_, n)| n.clone())
    }

    pub fn class_id(&self, name: &str) -> Option<ClassId> {
        self.classes.iter().find(|(_, n)| n == name).map(|(c, _)| *c)
    }

    /// Predicted class; `None` stands for "any class but the positive one"
    /// of a one-vs-rest binary model.
    pub fn predict(&self, x: &[f64]) -> CliResult<Option<ClassId>> {
        if x.len() != self.inputs {
            return Err(CliError::Dimension(format!(
                "model takes {} inputs, row has {}",
                self.inputs,
                x.len()
            )));
        }
        Ok(match &self.classifier {
            Classifier::Binary(b) => {
                if b.network.forward(x)? == 1 {
                    Some(b.positive)
                } else {
                    b.negative
                }
            }
            Classifier::Ton(t) => Some(ton_predict(t, x)?),
            Classifier::Ensemble(e) => Some(vote_predict(e, x)?),
            Classifier::Wta(w) => Some(wta_predict(w, x)?),
        })
    }

    pub fn is_correct(&self, prediction: Option<ClassId>, label: ClassId) -> bool {
        match (prediction, &self.classifier) {
            (Some(c), _) => c == label,
            (None, Classifier::Binary(b)) => label != b.positive,
            (None, _) => false,
        }
    }

    pub fn prediction_name(&self, prediction: Option<ClassId>) -> String {
        prediction.map_or_else(|| "rest".to_string(), |c| self.class_name(c))
    }

    /// Hidden units of every network, in file order.
    pub fn hidden_counts(&self) -> Vec<usize> {
        self.classifier
            .networks()
            .iter()
            .map(|n| n.hidden_count())
            .collect()
    }

    /// `sum_k H_k (N+1) + (H_k + 1)` over the networks.
    pub fn weight_count(&self) -> usize {
        self.classifier
            .networks()
            .iter()
            .map(|n| n.weight_count())
            .sum()
    }

    /// Maps the labels of `data` onto this model's class ids by class name.
    pub fn align(&self, data: &Dataset) -> CliResult<Dataset> {
        if data.dim() != self.inputs {
            return Err(CliError::Dimension(format!(
                "model takes {} inputs, data has {}",
                self.inputs,
                data.dim()
            )));
        }
        let mut features = Vec::with_capacity(data.len());
        let mut labels = Vec::with_capacity(data.len());
        for p in data.patterns() {
            let name = data
                .class_name(p.label)
                .map_or_else(|| p.label.to_string(), str::to_owned);
            let id = self
                .class_id(&name)
                .ok_or_else(|| CliError::Parse(format!("class {name:?} is unknown to the model")))?;
            features.push(p.features.clone());
            labels.push(id);
        }
        Ok(Dataset::from_parts(features, labels)?.with_class_names(self.classes.clone()))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "netlines-model {FORMAT_VERSION}");
        let _ = writeln!(s, "kind {}", self.classifier.kind());
        let _ = writeln!(s, "inputs {}", self.inputs);
        for (id, name) in &self.classes {
            let _ = writeln!(s, "class {id} {name}");
        }
        match &self.classifier {
            Classifier::Binary(b) => {
                let _ = writeln!(s, "positive {}", b.positive);
                match b.negative {
                    Some(c) => {
                        let _ = writeln!(s, "negative {c}");
                    }
                    None => s.push_str("negative rest\n"),
                }
                write_network(&mut s, &b.network);
            }
            Classifier::Ton(t) => write_ton(&mut s, t),
            Classifier::Ensemble(e) => {
                let _ = writeln!(s, "tons {}", e.len());
                for t in e.tons() {
                    write_ton(&mut s, t);
                }
            }
            Classifier::Wta(w) => {
                let _ = writeln!(s, "wta {}", join_ids(w.classes()));
                for n in w.networks() {
                    write_network(&mut s, n);
                }
            }
        }
        s
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut r = Lines::new(text);
        let version: u32 = r.keyed("netlines-model")?;
        if version != FORMAT_VERSION {
            return Err(r.error(format!("unsupported format version {version}")));
        }
        let kind = r.keyed_str("kind")?.to_string();
        let inputs: usize = r.keyed("inputs")?;
        let mut classes = Vec::new();
        while let Some(rest) = r.peek_keyed("class") {
            let (id, name) = rest.split_once(' ').unwrap_or((rest, ""));
            let id = id.parse().map_err(|_| r.error_next(format!("bad class id {id:?}")))?;
            classes.push((id, name.to_string()));
            r.advance();
        }
        let classifier = match kind.as_str() {
            "binary" => {
                let positive = r.keyed("positive")?;
                let negative = match r.keyed_str("negative")? {
                    "rest" => None,
                    v => Some(v.parse().map_err(|_| r.error(format!("bad class id {v:?}")))?),
                };
                let network = read_network(&mut r, inputs)?;
                Classifier::Binary(BinaryModel {
                    network,
                    positive,
                    negative,
                })
            }
            "ton" => Classifier::Ton(read_ton(&mut r, inputs)?),
            "ensemble" => {
                let k: usize = r.keyed("tons")?;
                let tons = (0..k)
                    .map(|_| read_ton(&mut r, inputs))
                    .collect::<CliResult<Vec<_>>>()?;
                Classifier::Ensemble(TonEnsemble::new(tons).map_err(|e| r.error(e.to_string()))?)
            }
            "wta" => {
                let text = r.keyed_str("wta")?;
                let ids = parse_ids(&r, text)?;
                let networks = (0..ids.len())
                    .map(|_| read_network(&mut r, inputs))
                    .collect::<CliResult<Vec<_>>>()?;
                Classifier::Wta(WtaClassifier::from_parts(ids, networks).map_err(|e| r.error(e.to_string()))?)
            }
            other => return Err(r.error(format!("unknown model kind {other:?}"))),
        };
        if let Some((line, _)) = r.next_line() {
            return Err(CliError::Model {
                line,
                message: "trailing content".into(),
            });
        }
        Ok(Self {
            inputs,
            classes,
            classifier,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> CliResult<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> CliResult<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn floats(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_float(v)).collect::<Vec<_>>().join(" ")
}

fn join_ids(ids: &[ClassId]) -> String {
    ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn write_ton(s: &mut String, t: &Ton) {
    let _ = writeln!(s, "ton {}", join_ids(t.sequence()));
    for n in t.chain() {
        write_network(s, n);
    }
}

fn write_network(s: &mut String, n: &NetLinesNetwork) {
    s.push_str("network\n");
    let _ = writeln!(s, "hidden {}", n.hidden_count());
    let _ = writeln!(s, "ls_flag {}", n.ls_flag());
    let _ = writeln!(s, "means {}", floats(n.standardizer().means()));
    let _ = writeln!(s, "deviations {}", floats(n.standardizer().deviations()));
    for u in n.hidden() {
        let _ = writeln!(s, "unit {}", floats(u.as_slice()));
    }
    let _ = writeln!(s, "output {}", floats(n.output()));
    s.push_str("end\n");
}

fn read_ton(r: &mut Lines<'_>, inputs: usize) -> CliResult<Ton> {
    let text = r.keyed_str("ton")?;
    let sequence = parse_ids(r, text)?;
    let chain = (0..sequence.len().saturating_sub(1))
        .map(|_| read_network(r, inputs))
        .collect::<CliResult<Vec<_>>>()?;
    Ton::from_parts(sequence, chain).map_err(|e| r.error(e.to_string()))
}

fn read_network(r: &mut Lines<'_>, inputs: usize) -> CliResult<NetLinesNetwork> {
    r.expect("network")?;
    let h: usize = r.keyed("hidden")?;
    let ls_flag = match r.keyed_str("ls_flag")? {
        "true" => true,
        "false" => false,
        v => return Err(r.error(format!("ls_flag must be true or false, found {v:?}"))),
    };
    let means = r.floats("means", inputs)?;
    let deviations = r.floats("deviations", inputs)?;
    let standardizer = Standardizer::new(means, deviations).map_err(|e| r.error(e.to_string()))?;
    let hidden = (0..h)
        .map(|_| r.floats("unit", inputs + 1).map(PerceptronWeights::new))
        .collect::<CliResult<Vec<_>>>()?;
    let output = r.floats("output", h + 1)?;
    r.expect("end")?;
    NetLinesNetwork::new(inputs, hidden, output, ls_flag, standardizer).map_err(|e| r.error(e.to_string()))
}

fn parse_ids(r: &Lines<'_>, text: &str) -> CliResult<Vec<ClassId>> {
    text.split_whitespace()
        .map(|t| t.parse().map_err(|_| r.error(format!("bad class id {t:?}"))))
        .collect()
}

/// Cursor over non-empty lines, remembering line numbers for errors.
struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
            .filter(|(_, l)| !l.trim().is_empty())
            .collect();
        Self { lines, pos: 0 }
    }

    /// Line number of the last consumed line (or of the end of input).
    fn current_line(&self) -> usize {
        self.lines
            .get(self.pos.saturating_sub(1))
            .map_or(0, |(n, _)| *n)
    }

    fn error(&self, message: String) -> CliError {
        CliError::Model {
            line: self.current_line(),
            message,
        }
    }

    fn error_next(&self, message: String) -> CliError {
        CliError::Model {
            line: self.lines.get(self.pos).map_or(0, |(n, _)| *n),
            message,
        }
    }

    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        let l = self.lines.get(self.pos).copied();
        if l.is_some() {
            self.pos += 1;
        }
        l
    }

    fn advance(&mut self) {
        self.pos += 1;
    }

    fn peek_keyed(&self, key: &str) -> Option<&'a str> {
        let (_, l) = self.lines.get(self.pos)?;
        let (k, rest) = l.split_once(' ').unwrap_or((l, ""));
        (k == key).then_some(rest)
    }

    fn expect(&mut self, key: &str) -> CliResult<()> {
        match self.next_line() {
            Some((_, l)) if l.trim() == key => Ok(()),
            Some((line, l)) => Err(CliError::Model {
                line,
                message: format!("expected {key:?}, found {l:?}"),
            }),
            None => Err(self.error(format!("expected {key:?}, found end of file"))),
        }
    }

    fn keyed_str(&mut self, key: &str) -> CliResult<&'a str> {
        match self.next_line() {
            Some((line, l)) => {
                let (k, rest) = l.split_once(' ').unwrap_or((l, ""));
                if k == key {
                    Ok(rest.trim())
                } else {
                    Err(CliError::Model {
                        line,
                        message: format!("expected {key:?}, found {l:?}"),
                    })
                }
            }
            None => Err(self.error(format!("expected {key:?}, found end of file"))),
        }
    }

    fn keyed<T: std::str::FromStr>(&mut self, key: &str) -> CliResult<T> {
        let v = self.keyed_str(key)?;
        v.parse()
            .map_err(|_| self.error(format!("bad value {v:?} for {key:?}")))
    }

    fn floats(&mut self, key: &str, count: usize) -> CliResult<Vec<f64>> {
        let v = self.keyed_str(key)?;
        let values = v
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| self.error(format!("bad number {t:?}")))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        if values.len() != count {
            return Err(self.error(format!(
                "{key:?} needs {count} values, found {}",
                values.len()
            )));
        }
        Ok(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn network(h: usize) -> NetLinesNetwork {
        let hidden = (0..h)
            .map(|i| PerceptronWeights::normalized(vec![0.1 * i as f64 - 0.3, 1.0 / 3.0, -2.0]).unwrap())
            .collect();
        let output = (0..=h).map(|i| (i as f64).sqrt() - 0.5).collect();
        let std = Standardizer::new(vec![0.25, -1.0 / 7.0], vec![1.5, 2.0]).unwrap();
        NetLinesNetwork::new(2, hidden, output, false, std).unwrap()
    }

    fn classes() -> Vec<(ClassId, String)> {
        vec![(0, "red".into()), (1, "light blue".into()), (2, "green".into())]
    }

    #[test]
    fn ensemble_round_trip_is_byte_identical() {
        let tons = vec![
            Ton::from_parts(vec![0, 1, 2], vec![network(2), network(1)]).unwrap(),
            Ton::from_parts(vec![2, 0, 1], vec![network(3), network(2)]).unwrap(),
            Ton::from_parts(vec![1, 0, 2], vec![network(1), network(1)]).unwrap(),
        ];
        let model = ModelFile {
            inputs: 2,
            classes: classes(),
            classifier: Classifier::Ensemble(TonEnsemble::new(tons).unwrap()),
        };
        let text = model.to_text();
        let back = ModelFile::parse(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_text(), text);
        assert_eq!(back.class_id("light blue"), Some(1));
        assert_eq!(back.weight_count(), model.hidden_counts().iter().map(|h| h * 3 + h + 1).sum());
    }

    #[test]
    fn binary_rest_and_wta_round_trip() {
        let binary = ModelFile {
            inputs: 2,
            classes: classes(),
            classifier: Classifier::Binary(BinaryModel {
                network: network(2),
                positive: 2,
                negative: None,
            }),
        };
        let wta = ModelFile {
            inputs: 2,
            classes: classes(),
            classifier: Classifier::Wta(
                WtaClassifier::from_parts(vec![0, 1, 2], vec![network(1), network(2), network(3)]).unwrap(),
            ),
        };
        for m in [binary, wta] {
            let back = ModelFile::parse(&m.to_text()).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn malformed_files_report_lines() {
        let model = ModelFile {
            inputs: 2,
            classes: classes(),
            classifier: Classifier::Binary(BinaryModel {
                network: network(1),
                positive: 1,
                negative: Some(0),
            }),
        };
        let text = model.to_text().replace("hidden 1", "hidden 2");
        match ModelFile::parse(&text) {
            Err(CliError::Model { line, .. }) => assert!(line > 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            ModelFile::parse("netlines-model 9\n"),
            Err(CliError::Model { line: 1, .. })
        ));
    }
}
