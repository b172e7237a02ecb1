use std::collections::HashSet;

use super::{NetRef, Predicate, Relation, Rule, RuleError, RuleSet, TimeOfDay};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Int(u64),
    /// Single-quoted literal.
    Net(String),
    /// Double-quoted literal.
    Text(String),
    LParen,
    RParen,
    Comma,
    Colon,
    Semi,
    Rel(Relation),
    Eof,
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> RuleError {
    RuleError::Syntax { line: pos.line, column: pos.column, message: message.into() }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), pos: Pos { line: 1, column: 1 } }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while self.chars.peek().is_some_and(|&c| c != '\n') {
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn quoted(&mut self, q: char, start: Pos) -> Result<String, RuleError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(syntax(start, "unterminated string literal")),
                Some(c) if c == q => return Ok(s),
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some(c @ ('\\' | '\'' | '"')) => s.push(c),
                    _ => return Err(syntax(self.pos, "invalid escape sequence")),
                },
                Some(c) => s.push(c),
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, Pos), RuleError> {
        self.skip_trivia();
        let start = self.pos;
        let Some(c) = self.bump() else {
            return Ok((Tok::Eof, start));
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            '\'' => Tok::Net(self.quoted('\'', start)?),
            '"' => Tok::Text(self.quoted('"', start)?),
            '<' | '>' => {
                let eq = self.chars.peek() == Some(&'=');
                if eq {
                    self.bump();
                }
                Tok::Rel(match (c, eq) {
                    ('<', false) => Relation::Lt,
                    ('<', true) => Relation::Le,
                    ('>', false) => Relation::Gt,
                    _ => Relation::Ge,
                })
            }
            '=' => {
                if self.chars.peek() == Some(&'=') {
                    self.bump();
                }
                Tok::Rel(Relation::Eq)
            }
            c if c.is_ascii_digit() => {
                let mut s = String::from(c);
                while let Some(&d) = self.chars.peek().filter(|d| d.is_ascii_digit()) {
                    s.push(d);
                    self.bump();
                }
                if self.chars.peek().is_some_and(|&d| is_word_char(d)) {
                    while let Some(&d) = self.chars.peek().filter(|&&d| is_word_char(d)) {
                        s.push(d);
                        self.bump();
                    }
                    Tok::Word(s)
                } else {
                    Tok::Int(s.parse().map_err(|_| syntax(start, "integer literal out of range"))?)
                }
            }
            c if is_word_char(c) => {
                let mut s = String::from(c);
                while let Some(&d) = self.chars.peek().filter(|&&d| is_word_char(d)) {
                    s.push(d);
                    self.bump();
                }
                Tok::Word(s)
            }
            other => return Err(syntax(start, format!("unexpected character {other:?}"))),
        };
        Ok((tok, start))
    }
}

const KEYWORDS: [&str; 6] = ["RULE", "IF", "THEN", "AND", "OR", "NOT"];

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.'
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    pos: Pos,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self, RuleError> {
        let mut lexer = Lexer::new(text);
        let (tok, pos) = lexer.next()?;
        Ok(Parser { lexer, tok, pos })
    }

    fn advance(&mut self) -> Result<(Tok, Pos), RuleError> {
        let (next, pos) = self.lexer.next()?;
        let prev = std::mem::replace(&mut self.tok, next);
        let prev_pos = std::mem::replace(&mut self.pos, pos);
        Ok((prev, prev_pos))
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Word(w) => format!("{w:?}"),
            Tok::Int(i) => i.to_string(),
            Tok::Net(s) => format!("'{s}'"),
            Tok::Text(s) => format!("{s:?}"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Colon => "':'".into(),
            Tok::Semi => "';'".into(),
            Tok::Rel(r) => format!("'{}'", r.symbol()),
            Tok::Eof => "end of input".into(),
        }
    }

    fn unexpected(&self, wanted: &str) -> RuleError {
        syntax(self.pos, format!("expected {wanted}, found {}", Self::describe(&self.tok)))
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.tok, Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn keyword(&mut self, kw: &str) -> Result<Pos, RuleError> {
        if self.at_keyword(kw) {
            Ok(self.advance()?.1)
        } else {
            Err(self.unexpected(kw))
        }
    }

    fn punct(&mut self, want: Tok, name: &str) -> Result<(), RuleError> {
        if self.tok == want {
            self.advance()?;
            Ok(())
        } else {
            Err(self.unexpected(name))
        }
    }

    fn rule(&mut self) -> Result<(Rule, Pos), RuleError> {
        self.keyword("RULE")?;
        let id_pos = self.pos;
        let id = match self.advance()? {
            (Tok::Word(w), _) => w,
            (Tok::Int(i), _) => i.to_string(),
            (tok, pos) => return Err(syntax(pos, format!("expected rule id, found {}", Self::describe(&tok)))),
        };
        self.punct(Tok::Colon, "':'")?;
        self.keyword("IF")?;
        let condition = self.expr()?;
        self.keyword("THEN")?;
        let content = match self.advance()? {
            (Tok::Text(s), _) => s,
            (tok, pos) => return Err(syntax(pos, format!("expected quoted content, found {}", Self::describe(&tok)))),
        };
        if self.tok == Tok::Semi {
            self.advance()?;
        }
        Ok((Rule { id, condition, content }, id_pos))
    }

    fn expr(&mut self) -> Result<Predicate, RuleError> {
        let mut lhs = self.conjunction()?;
        while self.at_keyword("OR") {
            self.advance()?;
            lhs = lhs.or(self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Predicate, RuleError> {
        let mut lhs = self.unary()?;
        while self.at_keyword("AND") {
            self.advance()?;
            lhs = lhs.and(self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Predicate, RuleError> {
        if self.at_keyword("NOT") {
            self.advance()?;
            return Ok(self.unary()?.negate());
        }
        if self.tok == Tok::LParen {
            self.advance()?;
            let inner = self.expr()?;
            self.punct(Tok::RParen, "')'")?;
            return Ok(inner);
        }
        self.term()
    }

    fn net(&mut self) -> Result<NetRef, RuleError> {
        match self.advance()? {
            (Tok::Net(s), _) => Ok(NetRef::new(s)),
            (tok, pos) => Err(syntax(pos, format!("expected quoted network name, found {}", Self::describe(&tok)))),
        }
    }

    fn time(&mut self) -> Result<TimeOfDay, RuleError> {
        match self.advance()? {
            (Tok::Net(s), pos) => {
                TimeOfDay::parse(&s).ok_or_else(|| syntax(pos, format!("invalid time of day '{s}', expected 'HH:MM'")))
            }
            (tok, pos) => Err(syntax(pos, format!("expected 'HH:MM', found {}", Self::describe(&tok)))),
        }
    }

    fn int(&mut self) -> Result<(u64, Pos), RuleError> {
        match self.advance()? {
            (Tok::Int(i), pos) => Ok((i, pos)),
            (tok, pos) => Err(syntax(pos, format!("expected integer, found {}", Self::describe(&tok)))),
        }
    }

    fn term(&mut self) -> Result<Predicate, RuleError> {
        let name = match &self.tok {
            Tok::Word(w) if !KEYWORDS.iter().any(|k| w.eq_ignore_ascii_case(k)) => w.to_ascii_uppercase(),
            _ => return Err(self.unexpected("condition")),
        };
        let name_pos = self.pos;
        self.advance()?;
        self.punct(Tok::LParen, "'('")?;
        let pred = match name.as_str() {
            "IS_VISIBLE" => Predicate::IsVisible(self.net()?),
            "NOT_VISIBLE" => Predicate::NotVisible(self.net()?),
            "CLOSE_THAN" => {
                let a = self.net()?;
                self.punct(Tok::Comma, "','")?;
                Predicate::CloseThan(a, self.net()?)
            }
            "FIRST_VISIT" => Predicate::FirstVisit,
            "FOLLOW_UP_VISIT" => Predicate::FollowUpVisit,
            "TIME_WITHIN" => {
                let s = self.time()?;
                self.punct(Tok::Comma, "','")?;
                Predicate::TimeWithin(s, self.time()?)
            }
            "TIME" => {
                self.punct(Tok::RParen, "')'")?;
                let rel = match self.advance()? {
                    (Tok::Rel(r), _) => r,
                    (tok, pos) => {
                        return Err(syntax(
                            pos,
                            format!("expected comparison operator, found {}", Self::describe(&tok)),
                        ))
                    }
                };
                return Ok(Predicate::TimeCompare(rel, self.time()?));
            }
            "IN_GROUP_OF" => {
                let (n, n_pos) = self.int()?;
                self.punct(Tok::Comma, "','")?;
                let (t, t_pos) = self.int()?;
                if n == 0 {
                    return Err(syntax(n_pos, "IN_GROUP_OF group size must be at least 1"));
                }
                if t == 0 {
                    return Err(syntax(t_pos, "IN_GROUP_OF duration must be positive"));
                }
                Predicate::InGroupOf { n: n as usize, t }
            }
            _ => return Err(syntax(name_pos, format!("unknown predicate {name}"))),
        };
        self.punct(Tok::RParen, "')'")?;
        Ok(pred)
    }
}

/// Parse a rule file. Stops at the first error.
pub fn parse_rules(text: &str) -> Result<RuleSet, RuleError> {
    let mut parser = Parser::new(text)?;
    let mut rules = Vec::new();
    let mut seen = HashSet::new();
    while parser.tok != Tok::Eof {
        let (rule, pos) = parser.rule()?;
        if !seen.insert(rule.id.clone()) {
            return Err(RuleError::DuplicateRuleId { id: rule.id, line: pos.line, column: pos.column });
        }
        rules.push(rule);
    }
    Ok(RuleSet { rules })
}
