//! Recursive-descent parsing of documents and strategy expressions into a
//! positioned syntax tree. Name resolution happens separately.

use super::lexer::{lex, Pos, Tok, Token};
use super::Diagnostic;
use crate::strategy::{Depth, Location, Selector, Strategy};

/// Parentheses, brackets and selectors may nest at most this deep.
pub const MAX_NESTING: usize = 128;

/// Parsed strategy trees may be at most this deep.
pub const MAX_DEPTH: usize = 256;

/// Words with a fixed meaning inside strategy expressions.
pub const STRATEGY_KEYWORDS: &[&str] = &[
    "id",
    "fail",
    "or",
    "all",
    "interface",
    "successors",
    "Interface",
    "Successors",
];

/// Words that start a top-level document item.
pub const ITEM_KEYWORDS: &[&str] = &["signature", "rule", "net", "named", "strategy"];

pub fn is_reserved(name: &str) -> bool {
    STRATEGY_KEYWORDS.contains(&name) || ITEM_KEYWORDS.contains(&name)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum SrcEp {
    Port {
        agent: String,
        port: u64,
    },
    Free(String),
    Lhs {
        symbol: String,
        prime: bool,
        port: u64,
    },
}

#[derive(Clone, Debug, Default)]
pub(crate) struct SrcNamed {
    pub pos: Pos,
    pub name: String,
    pub members: Vec<(Pos, String)>,
}

/// A `wire` or `map` line: its position and both positioned ends.
pub(crate) type SrcLink = (Pos, (Pos, SrcEp), (Pos, SrcEp));
/// A signature block: its position and the `(pos, symbol, arity)` entries.
pub(crate) type SrcSignature = (Pos, Vec<(Pos, String, u64)>);

#[derive(Clone, Debug, Default)]
pub(crate) struct SrcBody {
    pub decls: Vec<(Pos, String, Pos, String)>,
    pub wires: Vec<SrcLink>,
    pub frees: Vec<(Pos, String)>,
    pub named: Vec<SrcNamed>,
}

#[derive(Clone, Debug)]
pub(crate) struct SrcRule {
    pub pos: Pos,
    pub name: String,
    pub left: (Pos, String),
    pub right: (Pos, String),
    pub rhs: Option<SrcBody>,
    pub maps: Vec<SrcLink>,
}

#[derive(Clone, Debug)]
pub(crate) struct SrcNet {
    pub pos: Pos,
    pub name: String,
    pub body: SrcBody,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct SrcDoc {
    pub signatures: Vec<SrcSignature>,
    pub rules: Vec<SrcRule>,
    pub nets: Vec<SrcNet>,
    pub named: Vec<SrcNamed>,
    pub strategies: Vec<(Pos, String, Strategy)>,
    pub end: Pos,
}

type PResult<T> = Result<T, Diagnostic>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    at: usize,
    nesting: usize,
    /// Inside a `strategy NAME = ...;` item a `;` followed by an item
    /// keyword or the end of input terminates the expression.
    in_document: bool,
}

impl Parser {
    pub(crate) fn new(text: &str) -> PResult<Parser> {
        Ok(Parser {
            toks: lex(text)?,
            at: 0,
            nesting: 0,
            in_document: false,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &[&str]) -> PResult<T> {
        let found = self.peek().describe();
        let expected: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
        let message = if expected.is_empty() {
            format!("unexpected {found}")
        } else {
            format!("expected {}, found {found}", expected.join(" or "))
        };
        Err(Diagnostic::syntax(self.pos(), message, expected))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Pos> {
        if *self.peek() == tok {
            Ok(self.bump().pos)
        } else {
            self.unexpected(&[&format!("`{}`", tok.symbol())])
        }
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    fn ident(&mut self, what: &str) -> PResult<(Pos, String)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.bump().pos;
                Ok((pos, s))
            }
            _ => self.unexpected(&[what]),
        }
    }

    /// An identifier that is not a reserved word.
    fn name(&mut self, what: &str) -> PResult<(Pos, String)> {
        if let Tok::Ident(s) = self.peek() {
            if is_reserved(s) {
                return Err(Diagnostic::syntax(
                    self.pos(),
                    format!("`{s}` is a reserved word and cannot name a {what}"),
                    vec![what.to_string()],
                ));
            }
        }
        self.ident(what)
    }

    fn int(&mut self, what: &str) -> PResult<(Pos, u64)> {
        match self.peek() {
            Tok::Int(n) => {
                let n = *n;
                Ok((self.bump().pos, n))
            }
            _ => self.unexpected(&[what]),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.nesting += 1;
        if self.nesting > MAX_NESTING {
            return Err(Diagnostic::syntax(self.pos(), "nesting too deep", vec![]));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.nesting -= 1;
    }

    // Documents.

    pub(crate) fn document(&mut self) -> PResult<SrcDoc> {
        self.in_document = true;
        let mut doc = SrcDoc::default();
        loop {
            let pos = self.pos();
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(w) if w == "signature" => {
                    self.bump();
                    doc.signatures.push((pos, self.signature_body()?));
                }
                Tok::Ident(w) if w == "rule" => {
                    self.bump();
                    doc.rules.push(self.rule(pos)?);
                }
                Tok::Ident(w) if w == "net" => {
                    self.bump();
                    let (_, name) = self.ident("net name")?;
                    self.expect(Tok::LBrace)?;
                    let body = self.body(true)?;
                    self.expect(Tok::RBrace)?;
                    doc.nets.push(SrcNet { pos, name, body });
                }
                Tok::Ident(w) if w == "named" => {
                    self.bump();
                    doc.named.push(self.named(pos)?);
                }
                Tok::Ident(w) if w == "strategy" => {
                    self.bump();
                    let (_, name) = self.ident("strategy name")?;
                    self.expect(Tok::Eq)?;
                    let expr = self.strategy_top()?;
                    self.expect(Tok::Semi)?;
                    doc.strategies.push((pos, name, expr));
                }
                _ => {
                    return self.unexpected(&[
                        "`signature`",
                        "`rule`",
                        "`net`",
                        "`named`",
                        "`strategy`",
                    ])
                }
            }
        }
        doc.end = self.pos();
        Ok(doc)
    }

    fn signature_body(&mut self) -> PResult<Vec<(Pos, String, u64)>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while *self.peek() != Tok::RBrace {
            let (pos, name) = self.ident("symbol name")?;
            self.expect(Tok::Colon)?;
            let (_, arity) = self.int("arity")?;
            self.expect(Tok::Semi)?;
            out.push((pos, name, arity));
        }
        self.bump();
        Ok(out)
    }

    fn rule(&mut self, pos: Pos) -> PResult<SrcRule> {
        let (_, name) = self.name("rule")?;
        self.expect(Tok::Colon)?;
        let left = self.ident("symbol name")?;
        self.expect(Tok::Bowtie)?;
        let right = self.ident("symbol name")?;
        self.expect(Tok::LBrace)?;
        let mut rule = SrcRule {
            pos,
            name,
            left,
            right,
            rhs: None,
            maps: Vec::new(),
        };
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Ident(w) if w == "rhs" => {
                    let at = self.bump().pos;
                    if rule.rhs.is_some() {
                        return Err(Diagnostic::syntax(
                            at,
                            "second `rhs` block",
                            vec!["`map`".into(), "`}`".into()],
                        ));
                    }
                    self.expect(Tok::LBrace)?;
                    rule.rhs = Some(self.body(false)?);
                    self.expect(Tok::RBrace)?;
                }
                Tok::Ident(w) if w == "map" => {
                    let at = self.bump().pos;
                    let src = self.endpoint()?;
                    self.expect(Tok::Arrow)?;
                    let dst = self.endpoint()?;
                    self.expect(Tok::Semi)?;
                    rule.maps.push((at, src, dst));
                }
                _ => return self.unexpected(&["`rhs`", "`map`", "`}`"]),
            }
        }
        Ok(rule)
    }

    fn named(&mut self, pos: Pos) -> PResult<SrcNamed> {
        let (_, name) = self.name("selection")?;
        self.expect(Tok::LBrace)?;
        let mut members = Vec::new();
        while *self.peek() != Tok::RBrace {
            members.push(self.ident("agent name")?);
            self.expect(Tok::Semi)?;
        }
        self.bump();
        Ok(SrcNamed { pos, name, members })
    }

    /// Statements of a net or right-hand-side block, up to the closing
    /// brace (not consumed).
    fn body(&mut self, allow_named: bool) -> PResult<SrcBody> {
        let mut body = SrcBody::default();
        loop {
            let pos = self.pos();
            match (self.peek().clone(), self.peek_at(1).clone()) {
                (Tok::RBrace, _) => return Ok(body),
                (Tok::Ident(_), Tok::Colon) => {
                    let (_, agent) = self.ident("agent name")?;
                    self.bump();
                    let (spos, symbol) = self.ident("symbol name")?;
                    self.expect(Tok::Semi)?;
                    body.decls.push((pos, agent, spos, symbol));
                }
                (Tok::Ident(w), Tok::Ident(_)) if w == "free" => {
                    self.bump();
                    loop {
                        body.frees.push(self.ident("free port name")?);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::Semi)?;
                }
                (Tok::Ident(w), _) if w == "wire" => {
                    self.bump();
                    let a = self.endpoint()?;
                    self.expect(Tok::Dash)?;
                    let b = self.endpoint()?;
                    self.expect(Tok::Semi)?;
                    body.wires.push((pos, a, b));
                }
                (Tok::Ident(w), Tok::Ident(_)) if w == "named" && allow_named => {
                    self.bump();
                    body.named.push(self.named(pos)?);
                }
                _ => {
                    let mut expected = vec!["agent declaration", "`wire`", "`free`"];
                    if allow_named {
                        expected.push("`named`");
                    }
                    expected.push("`}`");
                    return self.unexpected(&expected);
                }
            }
        }
    }

    fn endpoint(&mut self) -> PResult<(Pos, SrcEp)> {
        let pos = self.pos();
        let (_, head) = self.ident("port reference")?;
        if head == "free" && matches!(self.peek(), Tok::Ident(_)) {
            let (_, name) = self.ident("free port name")?;
            return Ok((pos, SrcEp::Free(name)));
        }
        self.expect(Tok::Dot)?;
        match self.peek().clone() {
            Tok::Int(port) => {
                self.bump();
                Ok((pos, SrcEp::Port { agent: head, port }))
            }
            Tok::Ident(symbol) if head == "L" => {
                self.bump();
                let prime = *self.peek() == Tok::Prime;
                if prime {
                    self.bump();
                }
                self.expect(Tok::Dot)?;
                let (_, port) = self.int("port number")?;
                Ok((
                    pos,
                    SrcEp::Lhs {
                        symbol,
                        prime,
                        port,
                    },
                ))
            }
            _ => self.unexpected(&["port number"]),
        }
    }

    // Strategies.

    pub(crate) fn strategy_only(&mut self) -> PResult<Strategy> {
        let e = self.strategy_top()?;
        if *self.peek() != Tok::Eof {
            return self.unexpected(&["`;`", "`or`", "`||`", "`*`", "`(`", "`[`", "end of input"]);
        }
        Ok(e)
    }

    fn strategy_top(&mut self) -> PResult<Strategy> {
        Ok(self.top_d()?.0)
    }

    /// Rejects trees deeper than [`MAX_DEPTH`]; returns the new depth.
    fn deeper(&self, d: usize) -> PResult<usize> {
        if d >= MAX_DEPTH {
            return Err(Diagnostic::syntax(
                self.pos(),
                "expression too deep",
                vec![],
            ));
        }
        Ok(d + 1)
    }

    fn top_d(&mut self) -> PResult<(Strategy, usize)> {
        let (mut e, mut d) = self.par()?;
        while *self.peek() == Tok::LBracket {
            let locations = self.bracket()?;
            e = Strategy::at(e, locations);
            d = self.deeper(d)?;
        }
        Ok((e, d))
    }

    fn par(&mut self) -> PResult<(Strategy, usize)> {
        let (mut e, mut d) = self.or()?;
        while *self.peek() == Tok::Bars {
            self.bump();
            let (r, rd) = self.or()?;
            e = Strategy::par(e, r);
            d = self.deeper(d.max(rd))?;
        }
        Ok((e, d))
    }

    fn or(&mut self) -> PResult<(Strategy, usize)> {
        let (mut e, mut d) = self.seq()?;
        while self.is_word("or") {
            self.bump();
            let (r, rd) = self.seq()?;
            e = Strategy::or(e, r);
            d = self.deeper(d.max(rd))?;
        }
        Ok((e, d))
    }

    fn seq(&mut self) -> PResult<(Strategy, usize)> {
        let (mut e, mut d) = self.postfix()?;
        while *self.peek() == Tok::Semi {
            if self.in_document {
                let ends = match self.peek_at(1) {
                    Tok::Eof => true,
                    Tok::Ident(w) => ITEM_KEYWORDS.contains(&w.as_str()),
                    _ => false,
                };
                if ends {
                    break;
                }
            }
            self.bump();
            let (r, rd) = self.postfix()?;
            e = Strategy::seq(e, r);
            d = self.deeper(d.max(rd))?;
        }
        Ok((e, d))
    }

    fn postfix(&mut self) -> PResult<(Strategy, usize)> {
        let (mut e, mut d, mut bare) = self.atom()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    e = Strategy::star(e);
                    d = self.deeper(d)?;
                }
                Tok::LParen => {
                    let location = self.location()?;
                    e = match e {
                        Strategy::Apply {
                            rule,
                            location: None,
                        } if bare => Strategy::apply(rule, Some(location)),
                        other => {
                            d = self.deeper(d)?;
                            Strategy::at(other, vec![location])
                        }
                    };
                }
                _ => return Ok((e, d)),
            }
            bare = false;
        }
    }

    fn atom(&mut self) -> PResult<(Strategy, usize, bool)> {
        match self.peek().clone() {
            Tok::LParen => {
                self.enter()?;
                self.bump();
                let (e, d) = self.top_d()?;
                self.expect(Tok::RParen)?;
                self.leave();
                Ok((e, d, false))
            }
            Tok::Ident(w) if w == "id" => {
                self.bump();
                Ok((Strategy::Id, 1, false))
            }
            Tok::Ident(w) if w == "fail" => {
                self.bump();
                Ok((Strategy::Fail, 1, false))
            }
            Tok::Ident(w) if !is_reserved(&w) => {
                self.bump();
                Ok((Strategy::apply(w, None), 1, true))
            }
            _ => self.unexpected(&["rule name", "`id`", "`fail`", "`(`"]),
        }
    }

    fn location(&mut self) -> PResult<Location> {
        self.expect(Tok::LParen)?;
        let selector = self.selector()?;
        self.expect(Tok::Comma)?;
        let depth = self.depth()?;
        self.expect(Tok::RParen)?;
        Ok(Location::new(selector, depth))
    }

    fn bracket(&mut self) -> PResult<Vec<Location>> {
        self.expect(Tok::LBracket)?;
        let mut out = Vec::new();
        match self.peek() {
            Tok::RBracket => {}
            Tok::LParen => loop {
                out.push(self.location()?);
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            },
            _ => {
                let selector = self.selector()?;
                self.expect(Tok::Comma)?;
                let depth = self.depth()?;
                out.push(Location::new(selector, depth));
            }
        }
        self.expect(Tok::RBracket)?;
        Ok(out)
    }

    fn selector(&mut self) -> PResult<Selector> {
        match self.peek().clone() {
            Tok::Ident(w) if w == "all" => {
                self.bump();
                Ok(Selector::All)
            }
            Tok::Ident(w)
                if matches!(
                    w.as_str(),
                    "interface" | "Interface" | "successors" | "Successors"
                ) =>
            {
                self.bump();
                self.enter()?;
                self.expect(Tok::LParen)?;
                let inner = Box::new(self.selector()?);
                self.expect(Tok::RParen)?;
                self.leave();
                Ok(if w.eq_ignore_ascii_case("interface") {
                    Selector::Interface(inner)
                } else {
                    Selector::Successors(inner)
                })
            }
            Tok::Ident(w) if !is_reserved(&w) => {
                self.bump();
                Ok(Selector::Named(w))
            }
            _ => self.unexpected(&["selection name", "`all`", "`interface`", "`successors`"]),
        }
    }

    fn depth(&mut self) -> PResult<Depth> {
        let pos = self.pos();
        if *self.peek() == Tok::Dash {
            self.bump();
            return match self.peek() {
                Tok::Int(1) => {
                    self.bump();
                    Ok(Depth::Unbounded)
                }
                _ => Err(Diagnostic::syntax(
                    pos,
                    "depth must be -1 or a non-negative integer",
                    vec!["`1`".into()],
                )),
            };
        }
        let (_, d) = self.int("depth")?;
        u32::try_from(d)
            .map(Depth::Bounded)
            .map_err(|_| Diagnostic::syntax(pos, "depth too large", vec![]))
    }
}
