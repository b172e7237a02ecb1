//! Proximity production rules.
//!
//! A rule pairs a boolean condition over the device's Wi-Fi context with a
//! content payload that is delivered when the condition holds:
//!
//! ```text
//! RULE coupon: IF IS_VISIBLE('mycafe') AND FIRST_VISIT() THEN "present the coupon info"
//! ```
//!
//! `AND` binds tighter than `OR`, `NOT` binds tightest. Rules are evaluated
//! one by one against an immutable context; nothing is compiled into a
//! matching network.

mod eval;
mod parser;

use std::fmt;

use thiserror::Error;

use crate::proximity::MacAddr;

pub use eval::{
    eval_predicate, eval_rules, EngineConfig, EvalContext, Firing, DEFAULT_DELTA, DEFAULT_OMEGA, DEFAULT_SESSION_GAP,
};
pub use parser::parse_rules;

/// A network named in a rule. It matches an access point by SSID, or by
/// BSSID when the text has the shape of a hardware address.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetRef {
    text: String,
    bssid: Option<MacAddr>,
}

impl NetRef {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let bssid = text.parse().ok();
        NetRef { text, bssid }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn bssid(&self) -> Option<MacAddr> {
        self.bssid
    }
}

/// Minutes since local midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeOfDay(u16);

impl TimeOfDay {
    pub const MINUTES_PER_DAY: u16 = 24 * 60;

    pub fn new(hour: u16, minute: u16) -> Option<Self> {
        (hour < 24 && minute < 60).then_some(TimeOfDay(hour * 60 + minute))
    }

    pub fn from_minutes(minutes: u16) -> Option<Self> {
        (minutes < Self::MINUTES_PER_DAY).then_some(TimeOfDay(minutes))
    }

    /// Local clock time of an epoch timestamp shifted by `utc_offset` seconds.
    pub fn from_timestamp(t: f64, utc_offset: f64) -> Self {
        let secs = (t + utc_offset).rem_euclid(86_400.0);
        TimeOfDay(((secs / 60.0).floor() as u16).min(Self::MINUTES_PER_DAY - 1))
    }

    pub fn minutes(&self) -> u16 {
        self.0
    }

    /// Parses `HH:MM`.
    pub fn parse(s: &str) -> Option<Self> {
        let (h, m) = s.split_once(':')?;
        if h.is_empty() || h.len() > 2 || m.len() != 2 {
            return None;
        }
        if !h.bytes().chain(m.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        TimeOfDay::new(h.parse().ok()?, m.parse().ok()?)
    }
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Relation {
    pub fn holds<T: Ord>(&self, a: T, b: T) -> bool {
        match self {
            Relation::Lt => a < b,
            Relation::Le => a <= b,
            Relation::Eq => a == b,
            Relation::Ge => a >= b,
            Relation::Gt => a > b,
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    IsVisible(NetRef),
    NotVisible(NetRef),
    CloseThan(NetRef, NetRef),
    FirstVisit,
    FollowUpVisit,
    /// `[start, end)`, wrapping past midnight when `end < start`.
    TimeWithin(TimeOfDay, TimeOfDay),
    TimeCompare(Relation, TimeOfDay),
    /// At least `n` people (the user included) together for `t` seconds.
    InGroupOf {
        n: usize,
        t: u64,
    },
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn and(self, other: Predicate) -> Predicate {
        Predicate::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Predicate) -> Predicate {
        Predicate::Or(Box::new(self), Box::new(other))
    }

    pub fn negate(self) -> Predicate {
        Predicate::Not(Box::new(self))
    }
}

fn quote(out: &mut fmt::Formatter<'_>, text: &str, q: char) -> fmt::Result {
    write!(out, "{q}")?;
    for c in text.chars() {
        match c {
            '\\' => out.write_str("\\\\")?,
            '\n' => out.write_str("\\n")?,
            c if c == q => write!(out, "\\{c}")?,
            c => write!(out, "{c}")?,
        }
    }
    write!(out, "{q}")
}

/// Prints in the rule grammar; binary operators are always parenthesized.
impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::IsVisible(r) => {
                f.write_str("IS_VISIBLE(")?;
                quote(f, r.text(), '\'')?;
                f.write_str(")")
            }
            Predicate::NotVisible(r) => {
                f.write_str("NOT_VISIBLE(")?;
                quote(f, r.text(), '\'')?;
                f.write_str(")")
            }
            Predicate::CloseThan(a, b) => {
                f.write_str("CLOSE_THAN(")?;
                quote(f, a.text(), '\'')?;
                f.write_str(", ")?;
                quote(f, b.text(), '\'')?;
                f.write_str(")")
            }
            Predicate::FirstVisit => f.write_str("FIRST_VISIT()"),
            Predicate::FollowUpVisit => f.write_str("FOLLOW_UP_VISIT()"),
            Predicate::TimeWithin(s, e) => write!(f, "TIME_WITHIN('{s}', '{e}')"),
            Predicate::TimeCompare(rel, v) => write!(f, "TIME() {} '{v}'", rel.symbol()),
            Predicate::InGroupOf { n, t } => write!(f, "IN_GROUP_OF({n}, {t})"),
            Predicate::And(a, b) => write!(f, "({a} AND {b})"),
            Predicate::Or(a, b) => write!(f, "({a} OR {b})"),
            Predicate::Not(a) => write!(f, "NOT {a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub condition: Predicate,
    pub content: String,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RULE {}: IF {} THEN ", self.id, self.condition)?;
        quote(f, &self.content, '"')
    }
}

/// Rules in declaration order, ids unique.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    rules: Vec<Rule>,
}

impl RuleSet {
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("duplicate rule id {id:?} at line {line}, column {column}")]
    DuplicateRuleId { id: String, line: usize, column: usize },
}
