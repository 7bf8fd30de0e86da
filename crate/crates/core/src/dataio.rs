//! Dataset text formats and the binary model format.
//!
//! Dense: one example per line, comma-separated 0/1 features, label last.
//! Sparse: a `#literals=N` header, then `label<TAB>i1 i2 ...` per example.
//! Models: little-endian `GTM1` files holding a dense bank, a sparse bank or
//! a compiled rule set, each preceded by the full [`Config`].

use std::fs;
use std::path::Path;

use crate::config::Config;
use crate::dataset::{DenseDataset, SparseDataset};
use crate::dense::ClauseBank;
use crate::error::{Error, ModelFormatError, ParseError, ParseErrorKind, Result};
use crate::model::{Bank, Model};
use crate::predictor::{Rule, RuleSet};
use crate::sparse::{SparseClauseBank, SparseExample};

pub const MAGIC: [u8; 4] = *b"GTM1";
pub const FORMAT_VERSION: u16 = 1;

const KIND_DENSE: u8 = 0;
const KIND_SPARSE: u8 = 1;
const KIND_RULESET: u8 = 2;

fn perr(line: usize, kind: ParseErrorKind) -> Error {
    Error::Parse(ParseError { line, kind })
}

fn parse_label(field: &str, line: usize) -> Result<usize> {
    field
        .trim()
        .parse::<usize>()
        .map_err(|_| perr(line, ParseErrorKind::BadLabel(field.to_string())))
}

/// Lines with their 1-based numbers, trailing `\r` stripped, blank lines skipped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

pub fn parse_dense(text: &str) -> Result<DenseDataset> {
    let mut width = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (line, row) in content_lines(text) {
        let fields: Vec<&str> = row.split(',').collect();
        let found = fields.len() - 1;
        let expected = *width.get_or_insert(found);
        if found == 0 || found != expected {
            return Err(perr(line, ParseErrorKind::Ragged { expected: expected.max(1), found }));
        }
        for f in &fields[..found] {
            match f.trim() {
                "0" => features.push(0),
                "1" => features.push(1),
                other => return Err(perr(line, ParseErrorKind::NonBinary(other.to_string()))),
            }
        }
        labels.push(parse_label(fields[found], line)?);
    }
    let Some(width) = width else {
        return Err(perr(1, ParseErrorKind::Empty));
    };
    DenseDataset::new(width, features, labels)
}

pub fn format_dense(data: &DenseDataset) -> String {
    let mut out = String::with_capacity(data.len() * (2 * data.n_features() + 4));
    for i in 0..data.len() {
        for &b in data.row(i) {
            out.push(if b != 0 { '1' } else { '0' });
            out.push(',');
        }
        out.push_str(&data.label(i).to_string());
        out.push('\n');
    }
    out
}

pub fn load_dense(path: impl AsRef<Path>) -> Result<DenseDataset> {
    parse_dense(&fs::read_to_string(path)?)
}

pub fn write_dense(path: impl AsRef<Path>, data: &DenseDataset) -> Result<()> {
    Ok(fs::write(path, format_dense(data))?)
}

fn parse_header(row: &str) -> Option<std::result::Result<usize, ()>> {
    let rest = row.trim().strip_prefix('#')?.trim_start();
    let value = rest.strip_prefix("literals")?.trim_start().strip_prefix('=')?;
    Some(value.trim().parse::<usize>().map_err(|_| ()))
}

/// Sorting and duplicate errors are reported even when the header is missing,
/// so the first problem on the earliest line wins.
pub fn parse_sparse(text: &str) -> Result<SparseDataset> {
    let mut n_literals = None;
    let mut examples = Vec::new();
    let mut saw_content = false;
    for (line, row) in content_lines(text) {
        if !saw_content {
            saw_content = true;
            if let Some(parsed) = parse_header(row) {
                match parsed {
                    Ok(n) => n_literals = Some(n),
                    Err(()) => return Err(perr(line, ParseErrorKind::MissingHeader)),
                }
                continue;
            }
        }
        let Some((label, indices)) = row.split_once('\t') else {
            return Err(perr(line, ParseErrorKind::MissingTab));
        };
        let label = parse_label(label, line)?;
        let mut active: Vec<u32> = Vec::new();
        for tok in indices.split_ascii_whitespace() {
            let idx: u32 = tok
                .parse()
                .map_err(|_| perr(line, ParseErrorKind::BadIndex(tok.to_string())))?;
            if active.last().is_some_and(|&prev| prev >= idx) {
                return Err(perr(line, ParseErrorKind::Unsorted(idx)));
            }
            if let Some(n) = n_literals {
                if idx as usize >= n {
                    return Err(perr(line, ParseErrorKind::IndexOutOfRange { index: idx, n_literals: n }));
                }
            }
            active.push(idx);
        }
        examples.push(SparseExample { active, label });
    }
    if !saw_content {
        return Err(perr(1, ParseErrorKind::Empty));
    }
    let Some(n_literals) = n_literals else {
        return Err(perr(1, ParseErrorKind::MissingHeader));
    };
    SparseDataset::new(n_literals, examples)
}

pub fn format_sparse(data: &SparseDataset) -> String {
    let mut out = format!("#literals={}\n", data.n_literals());
    for ex in data.examples() {
        out.push_str(&ex.label.to_string());
        out.push('\t');
        let idx: Vec<String> = ex.active.iter().map(|i| i.to_string()).collect();
        out.push_str(&idx.join(" "));
        out.push('\n');
    }
    out
}

pub fn load_sparse(path: impl AsRef<Path>) -> Result<SparseDataset> {
    parse_sparse(&fs::read_to_string(path)?)
}

pub fn write_sparse(path: impl AsRef<Path>, data: &SparseDataset) -> Result<()> {
    Ok(fs::write(path, format_sparse(data))?)
}

/// Anything a model file can hold.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Model(Model),
    /// A compiled rule set with the config of the machine it came from.
    Rules { config: Config, rules: RuleSet },
}

impl Artifact {
    pub fn config(&self) -> &Config {
        match self {
            Artifact::Model(m) => &m.config,
            Artifact::Rules { config, .. } => config,
        }
    }

    /// The rule set, compiling the bank if needed.
    pub fn rule_set(&self) -> RuleSet {
        match self {
            Artifact::Model(m) => RuleSet::compile(m),
            Artifact::Rules { rules, .. } => rules.clone(),
        }
    }
}

impl From<Model> for Artifact {
    fn from(m: Model) -> Self {
        Artifact::Model(m)
    }
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Contract(format!("{what} = {v} does not fit in 32 bits")))
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn i8(&mut self, v: i8) {
        self.0.push(v as u8);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn i32(&mut self, v: i32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelFormatError> {
        let left = self.buf.len() - self.pos;
        if left < n {
            return Err(ModelFormatError::Truncated {
                offset: self.buf.len(),
                needed: n - left,
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn array<const N: usize>(&mut self) -> Result<[u8; N], ModelFormatError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
    fn u8(&mut self) -> Result<u8, ModelFormatError> {
        Ok(self.take(1)?[0])
    }
    fn i8(&mut self) -> Result<i8, ModelFormatError> {
        Ok(self.u8()? as i8)
    }
    fn u16(&mut self) -> Result<u16, ModelFormatError> {
        Ok(u16::from_le_bytes(self.array()?))
    }
    fn u32(&mut self) -> Result<u32, ModelFormatError> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn i32(&mut self) -> Result<i32, ModelFormatError> {
        Ok(i32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64, ModelFormatError> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64, ModelFormatError> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    fn bool(&mut self) -> Result<bool, ModelFormatError> {
        let at = self.pos;
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(corrupt(at, format!("boolean byte {v}"))),
        }
    }
    /// Refuses counts that could not possibly fit in the remaining bytes.
    fn count(&mut self, elem_size: usize) -> Result<usize, ModelFormatError> {
        let n = self.u32()? as usize;
        let left = self.buf.len() - self.pos;
        if n.saturating_mul(elem_size) > left {
            return Err(ModelFormatError::Truncated {
                offset: self.buf.len(),
                needed: n * elem_size - left,
            });
        }
        Ok(n)
    }
}

fn corrupt(offset: usize, reason: impl Into<String>) -> ModelFormatError {
    ModelFormatError::Corrupt {
        offset,
        reason: reason.into(),
    }
}

fn write_config(w: &mut Writer, c: &Config) -> Result<()> {
    w.u32(to_u32(c.n_literals, "n_literals")?);
    w.u32(to_u32(c.n_clauses, "n_clauses")?);
    w.u32(to_u32(c.n_classes, "n_classes")?);
    w.f64(c.s);
    w.u32(c.threshold);
    w.u32(c.n_literal_budget.unwrap_or(0));
    w.u8(c.boost_true_positive as u8);
    w.i8(c.init_state);
    w.i8(c.state_min);
    w.i8(c.state_max);
    w.u64(c.seed);
    w.u32(to_u32(c.n_blocks, "n_blocks")?);
    w.u8(c.negated_literals_enabled as u8);
    w.i8(c.sparse_floor);
    w.u32(c.sparse_capacity.unwrap_or(0));
    Ok(())
}

fn read_config(r: &mut Reader) -> Result<Config, ModelFormatError> {
    let start = r.pos;
    let nonzero = |v: u32| (v != 0).then_some(v);
    let cfg = Config {
        n_literals: r.u32()? as usize,
        n_clauses: r.u32()? as usize,
        n_classes: r.u32()? as usize,
        s: r.f64()?,
        threshold: r.u32()?,
        n_literal_budget: nonzero(r.u32()?),
        boost_true_positive: r.bool()?,
        init_state: r.i8()?,
        state_min: r.i8()?,
        state_max: r.i8()?,
        seed: r.u64()?,
        n_blocks: r.u32()? as usize,
        negated_literals_enabled: r.bool()?,
        sparse_floor: r.i8()?,
        sparse_capacity: nonzero(r.u32()?),
    };
    cfg.validate().map_err(|e| corrupt(start, e.to_string()))?;
    Ok(cfg)
}

/// Serialize to the `GTM1` byte layout.
pub fn model_to_bytes(artifact: &Artifact) -> Result<Vec<u8>> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(&MAGIC);
    w.u16(FORMAT_VERSION);
    let kind = match artifact {
        Artifact::Model(Model { bank: Bank::Dense(_), .. }) => KIND_DENSE,
        Artifact::Model(Model { bank: Bank::Sparse(_), .. }) => KIND_SPARSE,
        Artifact::Rules { .. } => KIND_RULESET,
    };
    w.u8(kind);
    write_config(&mut w, artifact.config())?;
    match artifact {
        Artifact::Model(Model { bank: Bank::Dense(b), .. }) => {
            for &s in b.states() {
                w.i8(s);
            }
            for &x in b.weights() {
                w.i32(x);
            }
        }
        Artifact::Model(Model { bank: Bank::Sparse(b), .. }) => {
            for j in 0..b.n_clauses() {
                let pairs = b.pairs(j);
                w.u32(to_u32(pairs.len(), "pair count")?);
                for &(l, s) in pairs {
                    w.u32(l);
                    w.i8(s);
                }
            }
            for &x in b.weights() {
                w.i32(x);
            }
        }
        Artifact::Rules { rules, .. } => {
            w.u32(to_u32(rules.len(), "rule count")?);
            for rule in rules.rules() {
                w.u32(to_u32(rule.literals.len(), "include count")?);
                for &l in &rule.literals {
                    w.u32(l);
                }
                for &x in &rule.weights {
                    w.i32(x);
                }
            }
        }
    }
    Ok(w.0)
}

/// Parse a `GTM1` byte buffer. Never returns a partially read model.
pub fn model_from_bytes(bytes: &[u8]) -> Result<Artifact> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic: [u8; 4] = match r.array() {
        Ok(m) => m,
        Err(_) => {
            let mut m = [0u8; 4];
            m[..bytes.len()].copy_from_slice(bytes);
            if m[..bytes.len()] != MAGIC[..bytes.len()] {
                return Err(ModelFormatError::BadMagic(m).into());
            }
            return Err(ModelFormatError::Truncated {
                offset: bytes.len(),
                needed: 4 - bytes.len(),
            }
            .into());
        }
    };
    if magic != MAGIC {
        return Err(ModelFormatError::BadMagic(magic).into());
    }
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(ModelFormatError::Version {
            found: version,
            expected: FORMAT_VERSION,
        }
        .into());
    }
    let kind = r.u8()?;
    if kind > KIND_RULESET {
        return Err(ModelFormatError::UnknownKind(kind).into());
    }
    let config = read_config(&mut r)?;
    let payload_at = r.pos;
    let bad_payload = |e: Error| Error::from(corrupt(payload_at, e.to_string()));
    let artifact = match kind {
        KIND_DENSE => {
            let n_states = config.n_clauses * config.literal_len();
            let states: Vec<i8> = r.take(n_states)?.iter().map(|&b| b as i8).collect();
            let weights = read_weights(&mut r, config.n_clauses * config.n_classes)?;
            if let Some(pos) = states.iter().position(|s| *s < config.state_min || *s > config.state_max) {
                return Err(corrupt(payload_at + pos, "state outside configured bounds").into());
            }
            let bank = ClauseBank::from_parts(config.n_clauses, config.literal_len(), config.n_classes, states, weights)
                .map_err(bad_payload)?;
            Artifact::Model(Model { config, bank: Bank::Dense(bank) })
        }
        KIND_SPARSE => {
            if config.negated_literals_enabled {
                return Err(corrupt(payload_at, "sparse bank with negated literals enabled").into());
            }
            let mut clauses = Vec::with_capacity(config.n_clauses);
            for _ in 0..config.n_clauses {
                let n = r.count(5)?;
                let mut pairs = Vec::with_capacity(n);
                for _ in 0..n {
                    pairs.push((r.u32()?, r.i8()?));
                }
                clauses.push(pairs);
            }
            let weights = read_weights(&mut r, config.n_clauses * config.n_classes)?;
            let bank = SparseClauseBank::from_parts(
                config.n_literals,
                config.n_classes,
                config.sparse_floor,
                config.sparse_capacity,
                clauses,
                weights,
            )
            .map_err(bad_payload)?;
            Artifact::Model(Model { config, bank: Bank::Sparse(bank) })
        }
        _ => {
            let n_rules = r.count(4)?;
            let mut rules = Vec::with_capacity(n_rules);
            for _ in 0..n_rules {
                let n = r.count(4)?;
                let literals = (0..n).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
                let weights = read_weights(&mut r, config.n_classes)?;
                rules.push(Rule { literals, weights });
            }
            let rules = RuleSet::from_rules(config.n_literals, config.n_classes, rules).map_err(bad_payload)?;
            Artifact::Rules { config, rules }
        }
    };
    if r.pos != bytes.len() {
        return Err(corrupt(r.pos, format!("{} trailing bytes", bytes.len() - r.pos)).into());
    }
    Ok(artifact)
}

fn read_weights(r: &mut Reader, n: usize) -> Result<Vec<i32>, ModelFormatError> {
    if n.saturating_mul(4) > r.buf.len() - r.pos {
        return Err(ModelFormatError::Truncated {
            offset: r.buf.len(),
            needed: n * 4 - (r.buf.len() - r.pos),
        });
    }
    (0..n).map(|_| r.i32()).collect()
}

pub fn save_model(artifact: &Artifact, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, model_to_bytes(artifact)?)?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Artifact> {
    model_from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kind(e: Error) -> ParseErrorKind {
        match e {
            Error::Parse(p) => p.kind,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    fn line(e: &Error) -> usize {
        match e {
            Error::Parse(p) => p.line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn dense_example() {
        let d = parse_dense("1,0,1,0\n0,1,1,1\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.n_features(), 3);
        assert_eq!(d.labels(), &[0, 1]);
        assert_eq!(d.row(0), &[1, 0, 1]);
    }

    #[test]
    fn dense_errors_carry_lines() {
        let e = parse_dense("1,2,0\n").unwrap_err();
        assert_eq!(line(&e), 1);
        assert_eq!(kind(e), ParseErrorKind::NonBinary("2".into()));

        let e = parse_dense("1,0,1\n1,1\n").unwrap_err();
        assert_eq!(line(&e), 2);
        assert_eq!(kind(e), ParseErrorKind::Ragged { expected: 2, found: 1 });

        assert_eq!(kind(parse_dense("").unwrap_err()), ParseErrorKind::Empty);
        assert_eq!(kind(parse_dense("\n\n").unwrap_err()), ParseErrorKind::Empty);
        assert!(matches!(kind(parse_dense("1,0,x\n").unwrap_err()), ParseErrorKind::BadLabel(_)));
    }

    #[test]
    fn dense_tolerates_crlf_and_blank_lines() {
        let d = parse_dense("1,0,1\r\n\n0,1,0\r\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.labels(), &[1, 0]);
    }

    #[test]
    fn sparse_example() {
        let d = parse_sparse("#literals=10\n1\t2 5 9\n").unwrap();
        assert_eq!(d.n_literals(), 10);
        assert_eq!(d.examples(), &[SparseExample { active: vec![2, 5, 9], label: 1 }]);
    }

    #[test]
    fn sparse_errors() {
        let e = parse_sparse("1\t5 2\n").unwrap_err();
        assert_eq!(kind(e), ParseErrorKind::Unsorted(2));
        assert_eq!(kind(parse_sparse("#literals=10\n1\t3 3\n").unwrap_err()), ParseErrorKind::Unsorted(3));
        let e = parse_sparse("#literals=10\n0\t1\n1\t10\n").unwrap_err();
        assert_eq!(line(&e), 3);
        assert_eq!(kind(e), ParseErrorKind::IndexOutOfRange { index: 10, n_literals: 10 });
        assert_eq!(kind(parse_sparse("1\t2 5\n").unwrap_err()), ParseErrorKind::MissingHeader);
        assert_eq!(kind(parse_sparse("#literals=3\n1 2\n").unwrap_err()), ParseErrorKind::MissingTab);
        assert!(matches!(kind(parse_sparse("#literals=3\n1\t2 a\n").unwrap_err()), ParseErrorKind::BadIndex(_)));
    }

    #[test]
    fn sparse_empty_active_list() {
        let d = parse_sparse("#literals=4\n0\t\n").unwrap();
        assert!(d.examples()[0].active.is_empty());
        assert_eq!(parse_sparse(&format_sparse(&d)).unwrap(), d);
    }

    fn small_dense_model(seed: u64) -> Model {
        let mut cfg = Config::new(3, 4, 2);
        cfg.seed = seed;
        let mut m = Model::new_dense(cfg).unwrap();
        if let Bank::Dense(b) = &mut m.bank {
            b.set_state(0, 1, 5);
            b.set_state(3, 4, 127);
            b.set_weight(2, 1, -7);
        }
        m
    }

    fn small_sparse_model() -> Model {
        let mut cfg = Config::new(100, 3, 3);
        cfg.negated_literals_enabled = false;
        let mut m = Model::new_sparse(cfg).unwrap();
        if let Bank::Sparse(b) = &mut m.bank {
            b.set_state(0, 99, 3);
            b.set_state(0, 4, -2);
            b.set_state(2, 50, 0);
            b.set_weight(1, 2, 12);
        }
        m
    }

    #[test]
    fn model_round_trips_byte_identically() {
        let rules = RuleSet::compile(&small_dense_model(1));
        for art in [
            Artifact::Model(small_dense_model(9)),
            Artifact::Model(small_sparse_model()),
            Artifact::Rules { config: small_dense_model(1).config, rules },
        ] {
            let bytes = model_to_bytes(&art).unwrap();
            let back = model_from_bytes(&bytes).unwrap();
            assert_eq!(back, art);
            assert_eq!(model_to_bytes(&back).unwrap(), bytes);
        }
    }

    #[test]
    fn dense_payload_layout() {
        let m = small_dense_model(0);
        let bytes = model_to_bytes(&Artifact::Model(m)).unwrap();
        assert_eq!(&bytes[..4], b"GTM1");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), FORMAT_VERSION);
        assert_eq!(bytes[6], KIND_DENSE);
        // header 7 + config 50 + 4 clauses * 6 states + 8 weights * 4 bytes
        assert_eq!(bytes.len(), 7 + 50 + 24 + 32);
    }

    #[test]
    fn format_errors_are_distinct() {
        let bytes = model_to_bytes(&Artifact::Model(small_dense_model(0))).unwrap();

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(model_from_bytes(&bad), Err(Error::Model(ModelFormatError::BadMagic(_)))));

        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(
            model_from_bytes(&bad),
            Err(Error::Model(ModelFormatError::Version { found: 9, expected: 1 }))
        ));

        let mut bad = bytes.clone();
        bad[6] = 7;
        assert!(matches!(model_from_bytes(&bad), Err(Error::Model(ModelFormatError::UnknownKind(7)))));

        for cut in [0, 2, 5, 20, bytes.len() - 1] {
            let r = model_from_bytes(&bytes[..cut]);
            assert!(matches!(r, Err(Error::Model(ModelFormatError::Truncated { .. }))), "cut {cut}: {r:?}");
        }

        let mut bad = bytes.clone();
        bad.push(0);
        assert!(matches!(model_from_bytes(&bad), Err(Error::Model(ModelFormatError::Corrupt { .. }))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.gtm");
        let art = Artifact::Model(small_sparse_model());
        save_model(&art, &p).unwrap();
        assert_eq!(load_model(&p).unwrap(), art);

        let dp = dir.path().join("d.csv");
        let d = parse_dense("1,0,3\n0,0,1\n").unwrap();
        write_dense(&dp, &d).unwrap();
        assert_eq!(load_dense(&dp).unwrap(), d);
    }

    proptest! {
        #[test]
        fn dense_text_round_trip(
            width in 1usize..20,
            rows in prop::collection::vec((prop::collection::vec(0u8..2, 20), 0usize..10), 1..40),
        ) {
            let feats: Vec<Vec<u8>> = rows.iter().map(|(r, _)| r[..width].to_vec()).collect();
            let labels: Vec<usize> = rows.iter().map(|(_, l)| *l).collect();
            let d = DenseDataset::from_rows(&feats, labels).unwrap();
            prop_assert_eq!(parse_dense(&format_dense(&d)).unwrap(), d);
        }

        #[test]
        fn sparse_text_round_trip(
            n in 1usize..5000,
            rows in prop::collection::vec((prop::collection::btree_set(0u32..5000, 0..30), 0usize..5), 1..60),
        ) {
            let examples = rows
                .into_iter()
                .map(|(set, label)| SparseExample {
                    active: set.into_iter().filter(|&i| (i as usize) < n).collect(),
                    label,
                })
                .collect();
            let d = SparseDataset::new(n, examples).unwrap();
            prop_assert_eq!(parse_sparse(&format_sparse(&d)).unwrap(), d);
        }

        #[test]
        fn dense_model_bytes_round_trip(
            states in prop::collection::vec(-127i8..=127, 2 * 4 * 3),
            weights in prop::collection::vec(any::<i32>(), 3 * 2),
            seed in any::<u64>(),
            s in 1.01f64..50.0,
        ) {
            let mut cfg = Config::new(4, 3, 2);
            cfg.seed = seed;
            cfg.s = s;
            let bank = ClauseBank::from_parts(3, 8, 2, states, weights).unwrap();
            let art = Artifact::Model(Model { config: cfg, bank: Bank::Dense(bank) });
            let bytes = model_to_bytes(&art).unwrap();
            let back = model_from_bytes(&bytes).unwrap();
            prop_assert_eq!(&back, &art);
            prop_assert_eq!(model_to_bytes(&back).unwrap(), bytes);
        }

        #[test]
        fn truncation_never_yields_a_model(cut_frac in 0.0f64..1.0) {
            let bytes = model_to_bytes(&Artifact::Model(small_sparse_model())).unwrap();
            let cut = (bytes.len() as f64 * cut_frac) as usize;
            prop_assert!(model_from_bytes(&bytes[..cut]).is_err());
        }
    }
}
