//! Recursive-descent / precedence-climbing parser for the property fragment.
//!
//! Binding strength, loosest first:
//!
//! | level | operators                       | assoc  |
//! |-------|---------------------------------|--------|
//! | 1     | `not` (prefix)                  |        |
//! | 2     | `and`, `or`                     | left   |
//! | 3     | `\|->`, `\|=>`                  | right  |
//! | 4     | `until`                         | right  |
//! | 5     | `within`                        | left   |
//! | 6     | `##n`, `##[m:n]` (binary, prefix) | left |
//! | 7     | `[*n]`, `[*m:n]`, `[->n]`, `[=n]` | postfix |
//! | 8     | `\|\|`                          | left   |
//! | 9     | `&&`                            | left   |
//! | 10    | `==`, `!=`                      | left   |
//! | 11    | `!` (prefix)                    |        |
//!
//! Operand sorts are checked as the tree is built, so a sequence compared
//! with `==` or a property used as an implication antecedent is rejected
//! with a type diagnostic pointing at the operand.

use super::ast::{AssertionUnit, Clock, DelaySpec, Edge, Node, Range, RelOp, SampleCall, SampleFn, Sort, Upper};
use super::diag::{Diagnostic, Pos};
use super::lexer::{tokenize, Keyword, Tok, Token, RESERVED};

pub(crate) const LEVEL_NOT: u8 = 1;
pub(crate) const LEVEL_PROP_BIN: u8 = 2;
pub(crate) const LEVEL_IMPL: u8 = 3;
pub(crate) const LEVEL_UNTIL: u8 = 4;
pub(crate) const LEVEL_WITHIN: u8 = 5;
pub(crate) const LEVEL_CONCAT: u8 = 6;
pub(crate) const LEVEL_REPEAT: u8 = 7;
pub(crate) const LEVEL_OROR: u8 = 8;
pub(crate) const LEVEL_ANDAND: u8 = 9;
pub(crate) const LEVEL_REL: u8 = 10;
pub(crate) const LEVEL_BANG: u8 = 11;
pub(crate) const LEVEL_PRIMARY: u8 = 12;

/// Largest delay or repetition count accepted in source text.
pub const MAX_BOUND: u64 = 1 << 16;

/// Parses one assertion unit. On failure the list holds at least one
/// diagnostic.
pub fn parse(text: &str) -> Result<AssertionUnit, Vec<Diagnostic>> {
    let tokens = tokenize(text).map_err(|d| vec![d])?;
    let mut p = Parser { tokens, idx: 0 };
    p.unit(text).map_err(|d| vec![d])
}

type PResult<T> = Result<T, Diagnostic>;

struct Parsed {
    node: Node,
    sort: Sort,
    pos: Pos,
    first: String,
}

enum Infix {
    PropAnd,
    PropOr,
    Impl { overlap: bool },
    Until,
    Within,
    Concat,
    Repeat(Tok),
    OrOr,
    AndAnd,
    Rel(RelOp),
}

fn infix(tok: &Tok) -> Option<(u8, Infix)> {
    Some(match tok {
        Tok::Kw(Keyword::And) => (LEVEL_PROP_BIN, Infix::PropAnd),
        Tok::Kw(Keyword::Or) => (LEVEL_PROP_BIN, Infix::PropOr),
        Tok::ImplOverlap => (LEVEL_IMPL, Infix::Impl { overlap: true }),
        Tok::ImplNonOverlap => (LEVEL_IMPL, Infix::Impl { overlap: false }),
        Tok::Kw(Keyword::Until) => (LEVEL_UNTIL, Infix::Until),
        Tok::Kw(Keyword::Within) => (LEVEL_WITHIN, Infix::Within),
        Tok::HashHash => (LEVEL_CONCAT, Infix::Concat),
        Tok::StarBracket | Tok::GotoBracket | Tok::EqBracket => (LEVEL_REPEAT, Infix::Repeat(tok.clone())),
        Tok::OrOr => (LEVEL_OROR, Infix::OrOr),
        Tok::AndAnd => (LEVEL_ANDAND, Infix::AndAnd),
        Tok::EqEq => (LEVEL_REL, Infix::Rel(RelOp::Eq)),
        Tok::NotEq => (LEVEL_REL, Infix::Rel(RelOp::Ne)),
        _ => return None,
    })
}

fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

fn found(tok: &Tok) -> String {
    match tok {
        Tok::Eof => "end of input".to_string(),
        other => format!("'{other}'"),
    }
}

struct Parser {
    tokens: Vec<Token>,
    idx: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.idx]
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.idx + ahead).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.idx].clone();
        if self.idx + 1 < self.tokens.len() {
            self.idx += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error_here(&self, message: impl Into<String>) -> Diagnostic {
        let t = self.peek();
        Diagnostic::new(t.pos, t.tok.to_string(), message)
    }

    fn expect(&mut self, tok: Tok, message: &str) -> PResult<Token> {
        if self.peek().tok == tok {
            Ok(self.advance())
        } else {
            Err(self.error_here(format!("{message}, found {}", found(&self.peek().tok))))
        }
    }

    fn unit(&mut self, source: &str) -> PResult<AssertionUnit> {
        let clock = self.clocking()?;
        let disable = if self.eat(&Tok::Kw(Keyword::Disable)) {
            self.expect(Tok::Kw(Keyword::Iff), "expected 'iff' after 'disable'")?;
            self.expect(Tok::LParen, "expected '(' after 'disable iff'")?;
            let cond = self.expr(0)?;
            check_sort(&cond, Sort::Bool, "disable condition")?;
            self.expect(Tok::RParen, "expected ')' to close the disable condition")?;
            Some(cond.node)
        } else {
            None
        };
        let locals = self.local_decls()?;
        let body = self.expr(0)?;
        self.finish()?;
        let body = locals
            .into_iter()
            .rev()
            .fold(body.node, |inner, name| Node::LocalVarDecl(name, Box::new(inner)));
        Ok(AssertionUnit {
            clock,
            disable,
            body,
            source: source.to_string(),
        })
    }

    fn clocking(&mut self) -> PResult<Clock> {
        if !(self.peek().tok == Tok::At && *self.peek_at(1) == Tok::LParen) {
            return Err(self.error_here(format!(
                "missing clocking event: expected '@(' at the start of the assertion, found {}",
                found(&self.peek().tok)
            )));
        }
        self.advance();
        self.advance();
        let edge = match self.peek().tok {
            Tok::Kw(Keyword::Posedge) => Edge::Posedge,
            Tok::Kw(Keyword::Negedge) => Edge::Negedge,
            _ => {
                return Err(self.error_here(format!(
                    "expected an edge (posedge or negedge) in the clocking event, found {}",
                    found(&self.peek().tok)
                )))
            }
        };
        self.advance();
        let signal = self.ident("expected clock signal name")?;
        self.expect(Tok::RParen, "expected ')' to close the clocking event")?;
        Ok(Clock { edge, signal })
    }

    fn ident(&mut self, message: &str) -> PResult<String> {
        match &self.peek().tok {
            Tok::Ident(name) if is_reserved(name) => {
                Err(self.error_here(format!("unsupported SVA keyword '{name}'")))
            }
            Tok::Ident(name) => {
                let name = name.clone();
                self.advance();
                Ok(name)
            }
            other => Err(self.error_here(format!("{message}, found {}", found(other)))),
        }
    }

    fn local_decls(&mut self) -> PResult<Vec<String>> {
        let mut names = Vec::new();
        while self.eat(&Tok::Kw(Keyword::Logic)) {
            loop {
                names.push(self.ident("expected local variable name in declaration")?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::Semi, "expected ';' after local variable declaration")?;
        }
        Ok(names)
    }

    fn finish(&mut self) -> PResult<()> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Eof => Ok(()),
            Tok::RParen => Err(self.error_here("unexpected ')' without a matching '('")),
            Tok::Ident(w) if is_reserved(w) => Err(self.error_here(format!("unsupported SVA keyword '{w}'"))),
            Tok::Kw(Keyword::Logic) => Err(self.error_here(
                "unexpected local variable declaration: declarations must precede the property",
            )),
            other => Err(self.error_here(format!("unexpected '{other}' after the end of the property"))),
        }
    }

    fn expr(&mut self, min: u8) -> PResult<Parsed> {
        let mut lhs = self.prefix()?;
        loop {
            let Some((level, op)) = infix(&self.peek().tok) else {
                self.reject_bad_infix()?;
                break;
            };
            if level < min {
                break;
            }
            let op_tok = self.advance();
            let takes_operand = !matches!(op, Infix::Repeat(_) | Infix::Concat);
            if takes_operand && matches!(self.peek().tok, Tok::Eof | Tok::RParen) {
                return Err(self.error_here(format!(
                    "expected expression after '{}', found {}",
                    op_tok.tok,
                    found(&self.peek().tok)
                )));
            }
            lhs = self.infix(lhs, op, op_tok)?;
        }
        Ok(lhs)
    }

    /// Tokens that cannot continue an expression but are a recognizable
    /// attempt at one get a targeted diagnostic.
    fn reject_bad_infix(&self) -> PResult<()> {
        let tok = &self.peek().tok;
        let msg = match tok {
            Tok::Arrow | Tok::FatArrow => {
                format!("'{tok}' is not an assertion implication operator; use '|->' or '|=>'")
            }
            Tok::Amp | Tok::Pipe | Tok::Caret => {
                format!("bitwise operator '{tok}' is not supported on boolean conditions; use '&&' or '||'")
            }
            Tok::Lt | Tok::Gt | Tok::Le | Tok::Ge => {
                format!("relational operator '{tok}' is not supported on 1-bit signals")
            }
            Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash => {
                format!("arithmetic operator {tok} is not supported on 1-bit signals")
            }
            Tok::Assign => "'=' is an assignment; use '==' for comparison".to_string(),
            Tok::Apostrophe => "invalid cast: type casts are not supported".to_string(),
            Tok::LBracket => "bit-select '[' is not supported on 1-bit signals".to_string(),
            Tok::Ident(w) if is_reserved(w) => format!("unsupported SVA keyword '{w}'"),
            _ => return Ok(()),
        };
        Err(self.error_here(msg))
    }

    fn prefix(&mut self) -> PResult<Parsed> {
        let t = self.peek().clone();
        let first = t.tok.to_string();
        let pos = t.pos;
        let mk = |node: Node, sort: Sort| Parsed {
            node,
            sort,
            pos,
            first: first.clone(),
        };
        match &t.tok {
            Tok::Ident(name) => {
                if is_reserved(name) {
                    if *self.peek_at(1) == Tok::Apostrophe {
                        self.advance();
                        return Err(self.error_here("invalid cast: type casts are not supported"));
                    }
                    return Err(self.error_here(format!("unsupported SVA keyword '{name}'")));
                }
                self.advance();
                Ok(mk(Node::Atom(name.clone()), Sort::Bool))
            }
            Tok::SysIdent(name) => {
                let call = self.sample_call(name.clone())?;
                Ok(mk(Node::Sample(call), Sort::Bool))
            }
            Tok::Bang => {
                self.advance();
                let operand = self.expr(LEVEL_BANG)?;
                check_sort(&operand, Sort::Bool, "operand of logical negation")?;
                Ok(mk(Node::Not(Box::new(operand.node)), Sort::Bool))
            }
            Tok::Kw(Keyword::Not) => {
                self.advance();
                let operand = self.expr(LEVEL_NOT)?;
                Ok(mk(Node::PropNot(Box::new(operand.node)), Sort::Prop))
            }
            Tok::HashHash => {
                self.advance();
                let spec = self.delay_spec()?;
                let operand = self.expr(LEVEL_REPEAT)?;
                check_sort(&operand, Sort::Seq, "delay operand")?;
                let node = match spec {
                    DelaySpec::Fixed(n) => Node::Delay(n, Box::new(operand.node)),
                    DelaySpec::Range(r) => Node::DelayRange(r, Box::new(operand.node)),
                };
                Ok(mk(node, Sort::Seq))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.expr(0)?;
                if self.peek().tok == Tok::Comma {
                    let node = self.local_assigns(inner)?;
                    self.expect(Tok::RParen, "expected ')' to close '('")?;
                    return Ok(mk(node, Sort::Seq));
                }
                self.expect(Tok::RParen, "expected ')' to close '('")?;
                Ok(Parsed {
                    node: inner.node,
                    sort: inner.sort,
                    pos,
                    first,
                })
            }
            Tok::Int(n) => Err(self.error_here(format!(
                "width mismatch: integer constant {n} used as a 1-bit boolean operand"
            ))),
            Tok::Literal(lit) => Err(self.error_here(format!(
                "width mismatch: constant {lit} used as a 1-bit boolean operand; only signal names are supported"
            ))),
            Tok::Tilde => Err(self.error_here("bitwise operator '~' is not supported on boolean conditions; use '!'")),
            Tok::Plus | Tok::Minus => Err(self.error_here(format!(
                "arithmetic operator {} is not supported on 1-bit signals",
                t.tok
            ))),
            Tok::At => Err(self.error_here("unexpected '@': only one clocking event is allowed, at the start")),
            Tok::Kw(Keyword::Disable) => {
                Err(self.error_here("unexpected 'disable': 'disable iff' must follow the clocking event"))
            }
            other => Err(self.error_here(format!("expected expression, found {}", found(other)))),
        }
    }

    fn local_assigns(&mut self, seq: Parsed) -> PResult<Node> {
        check_sort(&seq, Sort::Seq, "sequence of a local variable assignment")?;
        let mut node = seq.node;
        while self.eat(&Tok::Comma) {
            let var = self.ident("expected local variable name after ','")?;
            self.expect(Tok::Assign, "expected '=' in local variable assignment")?;
            let value = self.expr(LEVEL_OROR)?;
            check_sort(&value, Sort::Bool, "assigned value")?;
            node = Node::LocalVarAssign {
                seq: Box::new(node),
                var,
                value: Box::new(value.node),
            };
        }
        Ok(node)
    }

    fn infix(&mut self, lhs: Parsed, op: Infix, op_tok: Token) -> PResult<Parsed> {
        let Parsed { pos, first, .. } = &lhs;
        let (pos, first) = (*pos, first.clone());
        let done = |node: Node, sort: Sort| Parsed { node, sort, pos, first };
        match op {
            Infix::PropAnd | Infix::PropOr => {
                let rhs = self.expr(LEVEL_PROP_BIN + 1)?;
                let (a, b) = (Box::new(lhs.node), Box::new(rhs.node));
                let node = if matches!(op, Infix::PropAnd) {
                    Node::PropAnd(a, b)
                } else {
                    Node::PropOr(a, b)
                };
                Ok(done(node, Sort::Prop))
            }
            Infix::Impl { overlap } => {
                check_sort(&lhs, Sort::Seq, "implication antecedent")?;
                let rhs = self.expr(LEVEL_IMPL)?;
                let (a, b) = (Box::new(lhs.node), Box::new(rhs.node));
                let node = if overlap {
                    Node::ImplOverlap(a, b)
                } else {
                    Node::ImplNonOverlap(a, b)
                };
                Ok(done(node, Sort::Prop))
            }
            Infix::Until => {
                let rhs = self.expr(LEVEL_UNTIL)?;
                Ok(done(Node::Until(Box::new(lhs.node), Box::new(rhs.node)), Sort::Prop))
            }
            Infix::Within => {
                check_sort(&lhs, Sort::Seq, "containment operand")?;
                let rhs = self.expr(LEVEL_WITHIN + 1)?;
                check_sort(&rhs, Sort::Seq, "containment operand")?;
                Ok(done(Node::Within(Box::new(lhs.node), Box::new(rhs.node)), Sort::Seq))
            }
            Infix::Concat => {
                let spec = self.delay_spec()?;
                check_sort(&lhs, Sort::Seq, "delay operand")?;
                let rhs = self.expr(LEVEL_CONCAT + 1)?;
                check_sort(&rhs, Sort::Seq, "delay operand")?;
                Ok(done(Node::Concat(spec, Box::new(lhs.node), Box::new(rhs.node)), Sort::Seq))
            }
            Infix::Repeat(tok) => self.repetition(lhs, tok, op_tok),
            Infix::OrOr | Infix::AndAnd => {
                check_sort(&lhs, Sort::Bool, "operand of a logical operator")?;
                let level = if matches!(op, Infix::OrOr) { LEVEL_OROR } else { LEVEL_ANDAND };
                let rhs = self.expr(level + 1)?;
                check_sort(&rhs, Sort::Bool, "operand of a logical operator")?;
                let (a, b) = (Box::new(lhs.node), Box::new(rhs.node));
                let node = if matches!(op, Infix::OrOr) { Node::Or(a, b) } else { Node::And(a, b) };
                Ok(done(node, Sort::Bool))
            }
            Infix::Rel(rel) => {
                check_sort(&lhs, Sort::Bool, "comparison operand")?;
                let rhs = self.expr(LEVEL_REL + 1)?;
                check_sort(&rhs, Sort::Bool, "comparison operand")?;
                Ok(done(Node::Rel(rel, Box::new(lhs.node), Box::new(rhs.node)), Sort::Bool))
            }
        }
    }

    fn bound(&mut self, what: &str) -> PResult<u32> {
        match self.peek().tok {
            Tok::Int(n) if n <= MAX_BOUND => {
                self.advance();
                Ok(n as u32)
            }
            Tok::Int(n) => Err(self.error_here(format!("{what} {n} is too large"))),
            _ => Err(self.error_here(format!("expected {what}, found {}", found(&self.peek().tok)))),
        }
    }

    /// Parses what follows `##`: an integer or a bracketed range.
    fn delay_spec(&mut self) -> PResult<DelaySpec> {
        match self.peek().tok {
            Tok::Int(_) => Ok(DelaySpec::Fixed(self.bound("delay bound")?)),
            Tok::LBracket => {
                let open = self.advance();
                let lo = self.bound("lower bound in '##[' range")?;
                self.expect(Tok::Colon, "expected ':' in '##[' range")?;
                let hi = if self.eat(&Tok::Dollar) {
                    Upper::Unbounded
                } else {
                    Upper::Finite(self.bound("upper bound or '$' in '##[' range")?)
                };
                self.expect(Tok::RBracket, "expected ']' to close '##[' range")?;
                let range = Range::new(lo, hi);
                if !range.is_ordered() {
                    return Err(Diagnostic::new(
                        open.pos,
                        "##[",
                        format!("lower bound exceeds upper bound in '##[{range}]'"),
                    ));
                }
                Ok(DelaySpec::Range(range))
            }
            _ => Err(self.error_here(format!(
                "expected delay bound after '##', found {}",
                found(&self.peek().tok)
            ))),
        }
    }

    fn repetition(&mut self, operand: Parsed, tok: Tok, op_tok: Token) -> PResult<Parsed> {
        let opener = tok.to_string();
        let Parsed { node, sort, pos, first } = operand;
        let checked = Parsed { node, sort, pos, first };
        let count = self.bound(&format!("repetition count after '{opener}'"))?;
        let node = match tok {
            Tok::StarBracket => {
                check_sort(&checked, Sort::Seq, "repetition operand")?;
                if self.eat(&Tok::Colon) {
                    let hi = if self.eat(&Tok::Dollar) {
                        Upper::Unbounded
                    } else {
                        Upper::Finite(self.bound("upper bound or '$' in '[*' range")?)
                    };
                    self.expect(Tok::RBracket, "expected ']' to close '[*' range")?;
                    let range = Range::new(count, hi);
                    if !range.is_ordered() {
                        return Err(Diagnostic::new(
                            op_tok.pos,
                            "[*",
                            format!("lower bound exceeds upper bound in '[*{range}]'"),
                        ));
                    }
                    Node::RepeatRange(range, Box::new(checked.node))
                } else {
                    self.expect(Tok::RBracket, "expected ']' to close '[*'")?;
                    Node::RepeatConsec(count, Box::new(checked.node))
                }
            }
            _ => {
                if self.peek().tok == Tok::Colon {
                    return Err(self.error_here(format!("ranges are not supported in '{opener}' repetition")));
                }
                self.expect(Tok::RBracket, &format!("expected ']' to close '{opener}'"))?;
                if count == 0 {
                    return Err(Diagnostic::new(
                        op_tok.pos,
                        opener.clone(),
                        format!("repetition count in '{opener}' must be at least 1"),
                    ));
                }
                check_sort(&checked, Sort::Bool, "operand of a non-consecutive repetition")?;
                if tok == Tok::GotoBracket {
                    Node::RepeatGoto(count, Box::new(checked.node))
                } else {
                    Node::RepeatNonConsec(count, Box::new(checked.node))
                }
            }
        };
        Ok(Parsed {
            node,
            sort: Sort::Seq,
            pos: checked.pos,
            first: checked.first,
        })
    }

    fn sample_call(&mut self, name: String) -> PResult<SampleCall> {
        let Some(func) = SampleFn::from_name(&name) else {
            return Err(self.error_here(format!("unknown system function '{name}'")));
        };
        self.advance();
        self.expect(Tok::LParen, &format!("expected '(' after {name}"))?;
        let arity_msg = match func {
            SampleFn::Past => "$past expects one or two arguments".to_string(),
            _ => format!("{name} expects exactly one argument"),
        };
        if self.peek().tok == Tok::RParen {
            return Err(self.error_here(arity_msg));
        }
        let arg = self.expr(0)?;
        let Node::Atom(arg) = arg.node else {
            return Err(Diagnostic::new(
                arg.pos,
                arg.first,
                format!("{name} argument must be a single signal name"),
            ));
        };
        let mut cycles = None;
        if self.peek().tok == Tok::Comma {
            if func != SampleFn::Past {
                return Err(self.error_here(arity_msg));
            }
            self.advance();
            match self.peek().tok {
                Tok::Int(n) if (1..=MAX_BOUND).contains(&n) => {
                    self.advance();
                    cycles = Some(n as u32);
                }
                _ => return Err(self.error_here("$past delay must be a positive integer constant")),
            }
            if self.peek().tok == Tok::Comma {
                return Err(self.error_here(arity_msg));
            }
        }
        self.expect(Tok::RParen, &format!("expected ')' to close {name}("))?;
        Ok(SampleCall { func, arg, cycles })
    }
}

fn check_sort(p: &Parsed, allowed: Sort, context: &str) -> PResult<()> {
    if p.sort <= allowed {
        Ok(())
    } else {
        Err(Diagnostic::new(
            p.pos,
            p.first.clone(),
            format!(
                "type mismatch: {context} must be a {}, found a {}",
                allowed.describe(),
                p.sort.describe()
            ),
        ))
    }
}
