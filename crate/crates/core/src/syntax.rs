//! Process terms: names, labels, keys, the process grammar and its concrete
//! text syntax.
//!
//! Concrete syntax, loosest operator first:
//!
//! ```text
//! proc   := sum ;
//! sum    := par { "+" par } ;
//! par    := pref { "|" pref } ;
//! pref   := act [ "[" nat "]" ] "." pref | act [ "[" nat "]" ] | atom ;
//! atom   := "0" | "(" proc ")" | atom "\" name ;
//! act    := name | "~" name | "tau" ;
//! ```
//!
//! `+` and `|` associate to the left. A prefix with no continuation stands
//! for a prefix of `0`, and the printer omits a trailing `.0` the same way.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A channel name. Names are lowercase-leading identifiers; `tau` is reserved.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(ident: &str) -> Result<Self, SyntaxError> {
        if is_name(ident) {
            Ok(Name(Arc::from(ident)))
        } else {
            Err(SyntaxError::InvalidName(ident.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn is_name(ident: &str) -> bool {
    let mut chars = ident.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    ident != "tau" && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl TryFrom<String> for Name {
    type Error = SyntaxError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Name::new(&s)
    }
}

impl From<Name> for String {
    fn from(n: Name) -> String {
        n.0.to_string()
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An action label: input on a name, output on a name, or the silent `tau`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Label {
    Input(Name),
    Output(Name),
    Tau,
}

impl Label {
    pub fn input(name: &str) -> Self {
        Label::Input(Name::new(name).expect("valid name"))
    }

    pub fn output(name: &str) -> Self {
        Label::Output(Name::new(name).expect("valid name"))
    }

    /// `a` and `~a` are complements of each other; `tau` has none.
    pub fn complement(&self) -> Option<Label> {
        match self {
            Label::Input(a) => Some(Label::Output(a.clone())),
            Label::Output(a) => Some(Label::Input(a.clone())),
            Label::Tau => None,
        }
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Label::Tau)
    }

    /// The channel this label communicates on, if any.
    pub fn name(&self) -> Option<&Name> {
        match self {
            Label::Input(a) | Label::Output(a) => Some(a),
            Label::Tau => None,
        }
    }

    pub fn is_complement_of(&self, other: &Label) -> bool {
        match (self, other) {
            (Label::Input(a), Label::Output(b)) | (Label::Output(a), Label::Input(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Input(a) => write!(f, "{a}"),
            Label::Output(a) => write!(f, "~{a}"),
            Label::Tau => f.write_str("tau"),
        }
    }
}

/// A key identifying one executed action.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Key(pub u32);

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The least key not contained in `used`.
pub fn least_key_not_in(used: &BTreeSet<Key>) -> Key {
    let mut k = 0;
    for used_key in used {
        if used_key.0 == k {
            k += 1;
        } else if used_key.0 > k {
            break;
        }
    }
    Key(k)
}

/// A process term.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Process {
    Nil,
    Prefix(Label, Arc<Process>),
    Keyed(Label, Key, Arc<Process>),
    Sum(Arc<Process>, Arc<Process>),
    Par(Arc<Process>, Arc<Process>),
    /// `X \ a`; binds the plain name `a` inside `X`.
    Restrict(Name, Arc<Process>),
}

impl Process {
    pub fn prefix(label: Label, body: Process) -> Self {
        Process::Prefix(label, Arc::new(body))
    }

    pub fn keyed(label: Label, key: Key, body: Process) -> Self {
        Process::Keyed(label, key, Arc::new(body))
    }

    pub fn sum(left: Process, right: Process) -> Self {
        Process::Sum(Arc::new(left), Arc::new(right))
    }

    pub fn par(left: Process, right: Process) -> Self {
        Process::Par(Arc::new(left), Arc::new(right))
    }

    pub fn restrict(name: Name, body: Process) -> Self {
        Process::Restrict(name, Arc::new(body))
    }

    /// Number of operators (prefixes, sums, parallels, restrictions).
    pub fn size(&self) -> usize {
        match self {
            Process::Nil => 0,
            Process::Prefix(_, x) | Process::Keyed(_, _, x) | Process::Restrict(_, x) => {
                1 + x.size()
            }
            Process::Sum(x, y) | Process::Par(x, y) => 1 + x.size() + y.size(),
        }
    }

    /// Names occurring free.
    pub fn free_names(&self) -> BTreeSet<Name> {
        fn go(p: &Process, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
            match p {
                Process::Nil => {}
                Process::Prefix(l, x) | Process::Keyed(l, _, x) => {
                    if let Some(a) = l.name() {
                        if !bound.contains(a) {
                            out.insert(a.clone());
                        }
                    }
                    go(x, bound, out);
                }
                Process::Sum(x, y) | Process::Par(x, y) => {
                    go(x, bound, out);
                    go(y, bound, out);
                }
                Process::Restrict(a, x) => {
                    bound.push(a.clone());
                    go(x, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}

/// The set of keys occurring in `p`.
pub fn keys_of(p: &Process) -> BTreeSet<Key> {
    fn go(p: &Process, out: &mut BTreeSet<Key>) {
        match p {
            Process::Nil => {}
            Process::Prefix(_, x) | Process::Restrict(_, x) => go(x, out),
            Process::Keyed(_, k, x) => {
                out.insert(*k);
                go(x, out);
            }
            Process::Sum(x, y) | Process::Par(x, y) => {
                go(x, out);
                go(y, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    go(p, &mut out);
    out
}

/// Whether `key` occurs anywhere in `p`.
pub fn has_key(p: &Process, key: Key) -> bool {
    match p {
        Process::Nil => false,
        Process::Prefix(_, x) | Process::Restrict(_, x) => has_key(x, key),
        Process::Keyed(_, k, x) => *k == key || has_key(x, key),
        Process::Sum(x, y) | Process::Par(x, y) => has_key(x, key) || has_key(y, key),
    }
}

/// A process is standard when it contains no keys.
pub fn is_std(p: &Process) -> bool {
    match p {
        Process::Nil => true,
        Process::Keyed(..) => false,
        Process::Prefix(_, x) | Process::Restrict(_, x) => is_std(x),
        Process::Sum(x, y) | Process::Par(x, y) => is_std(x) && is_std(y),
    }
}

/// Renames bound names so that alpha-equivalent processes become identical.
///
/// Binders are numbered in pre-order; the i-th binder becomes `n<i>`. If a
/// free name already has that shape the stem is lengthened (`nn<i>`, ...)
/// so no free name can be captured.
pub fn canonicalize(p: &Process) -> Process {
    let free: HashSet<String> = p.free_names().iter().map(|n| n.to_string()).collect();
    let mut stem = String::from("n");
    while free.iter().any(|f| {
        f.strip_prefix(stem.as_str())
            .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
    }) {
        stem.push('n');
    }
    let mut counter = 0usize;
    let mut scope: Vec<(Name, Name)> = Vec::new();
    rename_bound(p, &stem, &mut counter, &mut scope)
}

fn rename_bound(
    p: &Process,
    stem: &str,
    counter: &mut usize,
    scope: &mut Vec<(Name, Name)>,
) -> Process {
    let rename_label = |l: &Label, scope: &Vec<(Name, Name)>| -> Label {
        let lookup = |a: &Name| {
            scope
                .iter()
                .rev()
                .find(|(from, _)| from == a)
                .map(|(_, to)| to.clone())
                .unwrap_or_else(|| a.clone())
        };
        match l {
            Label::Input(a) => Label::Input(lookup(a)),
            Label::Output(a) => Label::Output(lookup(a)),
            Label::Tau => Label::Tau,
        }
    };
    match p {
        Process::Nil => Process::Nil,
        Process::Prefix(l, x) => Process::prefix(
            rename_label(l, scope),
            rename_bound(x, stem, counter, scope),
        ),
        Process::Keyed(l, k, x) => Process::keyed(
            rename_label(l, scope),
            *k,
            rename_bound(x, stem, counter, scope),
        ),
        Process::Sum(x, y) => {
            let x = rename_bound(x, stem, counter, scope);
            Process::sum(x, rename_bound(y, stem, counter, scope))
        }
        Process::Par(x, y) => {
            let x = rename_bound(x, stem, counter, scope);
            Process::par(x, rename_bound(y, stem, counter, scope))
        }
        Process::Restrict(a, x) => {
            let fresh = Name::new(&format!("{stem}{counter}")).expect("generated name");
            *counter += 1;
            scope.push((a.clone(), fresh.clone()));
            let body = rename_bound(x, stem, counter, scope);
            scope.pop();
            Process::restrict(fresh, body)
        }
    }
}

/// Renumbers keys in order of first pre-order occurrence (0, 1, ...), so that
/// processes differing only by a bijective renaming of keys coincide.
pub fn normalize_keys(p: &Process) -> Process {
    fn go(p: &Process, map: &mut BTreeMap<Key, Key>) -> Process {
        match p {
            Process::Nil => Process::Nil,
            Process::Prefix(l, x) => Process::prefix(l.clone(), go(x, map)),
            Process::Keyed(l, k, x) => {
                let next = Key(map.len() as u32);
                let k = *map.entry(*k).or_insert(next);
                Process::keyed(l.clone(), k, go(x, map))
            }
            Process::Sum(x, y) => {
                let x = go(x, map);
                Process::sum(x, go(y, map))
            }
            Process::Par(x, y) => {
                let x = go(x, map);
                Process::par(x, go(y, map))
            }
            Process::Restrict(a, x) => Process::restrict(a.clone(), go(x, map)),
        }
    }
    go(p, &mut BTreeMap::new())
}

/// Applies a key renaming; keys missing from `map` are kept.
pub fn rename_keys(p: &Process, map: &HashMap<Key, Key>) -> Process {
    match p {
        Process::Nil => Process::Nil,
        Process::Prefix(l, x) => Process::prefix(l.clone(), rename_keys(x, map)),
        Process::Keyed(l, k, x) => {
            Process::keyed(l.clone(), *map.get(k).unwrap_or(k), rename_keys(x, map))
        }
        Process::Sum(x, y) => Process::sum(rename_keys(x, map), rename_keys(y, map)),
        Process::Par(x, y) => Process::par(rename_keys(x, map), rename_keys(y, map)),
        Process::Restrict(a, x) => Process::restrict(a.clone(), rename_keys(x, map)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("syntax error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid name `{0}`")]
    InvalidName(String),
}

impl SyntaxError {
    pub(crate) fn at(pos: usize, msg: impl Into<String>) -> Self {
        SyntaxError::Parse {
            pos,
            msg: msg.into(),
        }
    }
}

// ---------------------------------------------------------------------------
// Lexing, shared with the proof label parser.

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Nat(u32),
    Tilde,
    Dot,
    Comma,
    Plus,
    Bar,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LAngle,
    RAngle,
    Backslash,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Nat(n) => write!(f, "`{n}`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrack => f.write_str("`[`"),
            Tok::RBrack => f.write_str("`]`"),
            Tok::LAngle => f.write_str("`<`"),
            Tok::RAngle => f.write_str("`>`"),
            Tok::Backslash => f.write_str("`\\`"),
        }
    }
}

pub(crate) fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b'~' => Some(Tok::Tilde),
            b'.' => Some(Tok::Dot),
            b',' => Some(Tok::Comma),
            b'+' => Some(Tok::Plus),
            b'|' => Some(Tok::Bar),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'[' => Some(Tok::LBrack),
            b']' => Some(Tok::RBrack),
            b'<' => Some(Tok::LAngle),
            b'>' => Some(Tok::RAngle),
            b'\\' => Some(Tok::Backslash),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push((start, tok));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let digits = &text[start..i];
            let n = digits.parse::<u32>().map_err(|_| {
                SyntaxError::at(
                    start,
                    format!("key `{digits}` is not a natural number in range"),
                )
            })?;
            out.push((start, Tok::Nat(n)));
        } else if c.is_ascii_alphabetic() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else {
            let ch = text[start..].chars().next().unwrap_or('?');
            return Err(SyntaxError::at(
                start,
                format!("unexpected character `{ch}`"),
            ));
        }
    }
    Ok(out)
}

pub(crate) struct Cursor {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Cursor {
    pub(crate) fn new(text: &str) -> Result<Self, SyntaxError> {
        Ok(Cursor {
            toks: lex(text)?,
            pos: 0,
            end: text.len(),
        })
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    pub(crate) fn peek_at(&self, ahead: usize) -> Option<&Tok> {
        self.toks.get(self.pos + ahead).map(|(_, t)| t)
    }

    pub(crate) fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    pub(crate) fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<(), SyntaxError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {tok}")))
        }
    }

    pub(crate) fn unexpected(&self, what: &str) -> SyntaxError {
        match self.peek() {
            Some(t) => SyntaxError::at(self.offset(), format!("{what}, found {t}")),
            None => SyntaxError::at(self.offset(), format!("{what}, found end of input")),
        }
    }

    pub(crate) fn finish(&self) -> Result<(), SyntaxError> {
        if self.pos < self.toks.len() {
            Err(self.unexpected("expected end of input"))
        } else {
            Ok(())
        }
    }

    pub(crate) fn name(&mut self) -> Result<Name, SyntaxError> {
        let at = self.offset();
        match self.peek() {
            Some(Tok::Ident(s)) if is_name(s) => {
                let n = Name(Arc::from(s.as_str()));
                self.pos += 1;
                Ok(n)
            }
            Some(Tok::Ident(s)) => Err(SyntaxError::at(at, format!("`{s}` is not a valid name"))),
            _ => Err(self.unexpected("expected a name")),
        }
    }

    /// Whether an action starts here (`name`, `~name` or `tau`).
    pub(crate) fn at_action(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::Tilde))
    }

    pub(crate) fn action(&mut self) -> Result<Label, SyntaxError> {
        if self.eat(&Tok::Tilde) {
            return Ok(Label::Output(self.name()?));
        }
        if self.peek() == Some(&Tok::Ident("tau".into())) {
            self.pos += 1;
            return Ok(Label::Tau);
        }
        Ok(Label::Input(self.name()?))
    }

    pub(crate) fn key(&mut self) -> Result<Key, SyntaxError> {
        self.expect(&Tok::LBrack)?;
        let k = match self.bump() {
            Some(Tok::Nat(n)) => Key(n),
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("expected a natural number key"));
            }
        };
        self.expect(&Tok::RBrack)?;
        Ok(k)
    }
}

/// Parses a process from its concrete syntax.
pub fn parse(text: &str) -> Result<Process, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let p = parse_sum(&mut cur)?;
    cur.finish()?;
    Ok(p)
}

fn parse_sum(cur: &mut Cursor) -> Result<Process, SyntaxError> {
    let mut p = parse_par(cur)?;
    while cur.eat(&Tok::Plus) {
        p = Process::sum(p, parse_par(cur)?);
    }
    Ok(p)
}

fn parse_par(cur: &mut Cursor) -> Result<Process, SyntaxError> {
    let mut p = parse_pref(cur)?;
    while cur.eat(&Tok::Bar) {
        p = Process::par(p, parse_pref(cur)?);
    }
    Ok(p)
}

fn parse_pref(cur: &mut Cursor) -> Result<Process, SyntaxError> {
    if !cur.at_action() {
        return parse_atom(cur);
    }
    let label = cur.action()?;
    let key = if cur.peek() == Some(&Tok::LBrack) {
        Some(cur.key()?)
    } else {
        None
    };
    let body = if cur.eat(&Tok::Dot) {
        parse_pref(cur)?
    } else {
        Process::Nil
    };
    Ok(match key {
        Some(k) => Process::keyed(label, k, body),
        None => Process::prefix(label, body),
    })
}

fn parse_atom(cur: &mut Cursor) -> Result<Process, SyntaxError> {
    let mut p = match cur.peek() {
        Some(Tok::Nat(0)) => {
            cur.bump();
            Process::Nil
        }
        Some(Tok::LParen) => {
            cur.bump();
            let p = parse_sum(cur)?;
            cur.expect(&Tok::RParen)?;
            p
        }
        _ => return Err(cur.unexpected("expected a process")),
    };
    while cur.eat(&Tok::Backslash) {
        p = Process::restrict(cur.name()?, p);
    }
    Ok(p)
}

// ---------------------------------------------------------------------------
// Printing.

const SUM: u8 = 0;
const PAR: u8 = 1;
const PREF: u8 = 2;
const ATOM: u8 = 3;

/// Prints `p` in concrete syntax with the fewest parentheses that still
/// parse back to the same tree.
pub fn pretty_print(p: &Process) -> String {
    let mut out = String::new();
    write_proc(&mut out, p, SUM);
    out
}

fn write_proc(out: &mut String, p: &Process, ctx: u8) {
    let paren = match p {
        Process::Nil | Process::Restrict(..) => false,
        Process::Prefix(..) | Process::Keyed(..) => ctx > PREF,
        Process::Par(..) => ctx > PAR,
        Process::Sum(..) => ctx > SUM,
    };
    if paren {
        out.push('(');
    }
    match p {
        Process::Nil => out.push('0'),
        Process::Prefix(l, x) | Process::Keyed(l, _, x) => {
            out.push_str(&l.to_string());
            if let Process::Keyed(_, k, _) = p {
                out.push_str(&format!("[{k}]"));
            }
            if **x != Process::Nil {
                out.push('.');
                write_proc(out, x, PREF);
            }
        }
        Process::Sum(x, y) => {
            write_proc(out, x, SUM);
            out.push_str(" + ");
            write_proc(out, y, PAR);
        }
        Process::Par(x, y) => {
            write_proc(out, x, PAR);
            out.push_str(" | ");
            write_proc(out, y, PREF);
        }
        Process::Restrict(a, x) => {
            write_proc(out, x, ATOM);
            out.push('\\');
            out.push_str(a.as_str());
        }
    }
    if paren {
        out.push(')');
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_print(self))
    }
}

impl std::str::FromStr for Process {
    type Err = SyntaxError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Serialize for Process {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&pretty_print(self))
    }
}

impl<'de> Deserialize<'de> for Process {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

/// An S-expression rendering of the abstract syntax tree.
pub fn ast_string(p: &Process) -> String {
    match p {
        Process::Nil => "Nil".into(),
        Process::Prefix(l, x) => format!("Prefix({}, {})", label_ast(l), ast_string(x)),
        Process::Keyed(l, k, x) => format!("KeyedPrefix({}, {k}, {})", label_ast(l), ast_string(x)),
        Process::Sum(x, y) => format!("Sum({}, {})", ast_string(x), ast_string(y)),
        Process::Par(x, y) => format!("Par({}, {})", ast_string(x), ast_string(y)),
        Process::Restrict(a, x) => format!("Restrict({a}, {})", ast_string(x)),
    }
}

fn label_ast(l: &Label) -> String {
    match l {
        Label::Input(a) => format!("Input {a}"),
        Label::Output(a) => format!("Output {a}"),
        Label::Tau => "Tau".into(),
    }
}
