//! Canonical printing. Parentheses are emitted only where the parser's
//! binding levels require them, plus around a `not` that has a parent
//! operator: `not` swallows everything to its right, so leaving it bare
//! inside a larger expression would change the tree on re-parse.

use std::fmt::{self, Write};

use super::ast::{AssertionUnit, Node};
use super::parser::*;

fn level(node: &Node) -> u8 {
    match node {
        Node::PropNot(_) => LEVEL_NOT,
        Node::PropAnd(..) | Node::PropOr(..) => LEVEL_PROP_BIN,
        Node::ImplOverlap(..) | Node::ImplNonOverlap(..) => LEVEL_IMPL,
        Node::Until(..) => LEVEL_UNTIL,
        Node::Within(..) => LEVEL_WITHIN,
        Node::Concat(..) | Node::Delay(..) | Node::DelayRange(..) => LEVEL_CONCAT,
        Node::RepeatConsec(..) | Node::RepeatRange(..) | Node::RepeatGoto(..) | Node::RepeatNonConsec(..) => {
            LEVEL_REPEAT
        }
        Node::Or(..) => LEVEL_OROR,
        Node::And(..) => LEVEL_ANDAND,
        Node::Rel(..) => LEVEL_REL,
        Node::Not(_) => LEVEL_BANG,
        Node::Atom(_) | Node::Sample(_) | Node::LocalVarAssign { .. } => LEVEL_PRIMARY,
        Node::LocalVarDecl(..) => 0,
    }
}

fn operand(f: &mut impl Write, child: &Node, min: u8) -> fmt::Result {
    if level(child) < min || matches!(child, Node::PropNot(_)) {
        f.write_char('(')?;
        write_node(f, child)?;
        f.write_char(')')
    } else {
        write_node(f, child)
    }
}

fn binary(f: &mut impl Write, l: &Node, op: &str, r: &Node, lmin: u8, rmin: u8) -> fmt::Result {
    operand(f, l, lmin)?;
    write!(f, " {op} ")?;
    operand(f, r, rmin)
}

fn write_node(f: &mut impl Write, node: &Node) -> fmt::Result {
    match node {
        Node::Atom(name) => f.write_str(name),
        Node::Sample(call) => write!(f, "{call}"),
        Node::Not(x) => {
            f.write_char('!')?;
            operand(f, x, LEVEL_BANG)
        }
        Node::And(a, b) => binary(f, a, "&&", b, LEVEL_ANDAND, LEVEL_ANDAND + 1),
        Node::Or(a, b) => binary(f, a, "||", b, LEVEL_OROR, LEVEL_OROR + 1),
        Node::Rel(op, a, b) => binary(f, a, op.as_str(), b, LEVEL_REL, LEVEL_REL + 1),
        Node::Delay(n, x) => {
            write!(f, "##{n} ")?;
            operand(f, x, LEVEL_REPEAT)
        }
        Node::DelayRange(r, x) => {
            write!(f, "##[{r}] ")?;
            operand(f, x, LEVEL_REPEAT)
        }
        Node::Concat(spec, a, b) => binary(f, a, &spec.to_string(), b, LEVEL_CONCAT, LEVEL_CONCAT + 1),
        Node::RepeatConsec(n, x) => {
            operand(f, x, LEVEL_REPEAT)?;
            write!(f, "[*{n}]")
        }
        Node::RepeatRange(r, x) => {
            operand(f, x, LEVEL_REPEAT)?;
            write!(f, "[*{r}]")
        }
        Node::RepeatGoto(n, x) => {
            operand(f, x, LEVEL_REPEAT)?;
            write!(f, "[->{n}]")
        }
        Node::RepeatNonConsec(n, x) => {
            operand(f, x, LEVEL_REPEAT)?;
            write!(f, "[={n}]")
        }
        Node::ImplOverlap(a, b) => binary(f, a, "|->", b, LEVEL_IMPL + 1, LEVEL_IMPL),
        Node::ImplNonOverlap(a, b) => binary(f, a, "|=>", b, LEVEL_IMPL + 1, LEVEL_IMPL),
        Node::Until(a, b) => binary(f, a, "until", b, LEVEL_UNTIL + 1, LEVEL_UNTIL),
        Node::Within(a, b) => binary(f, a, "within", b, LEVEL_WITHIN, LEVEL_WITHIN + 1),
        Node::PropAnd(a, b) => binary(f, a, "and", b, LEVEL_PROP_BIN, LEVEL_PROP_BIN + 1),
        Node::PropOr(a, b) => binary(f, a, "or", b, LEVEL_PROP_BIN, LEVEL_PROP_BIN + 1),
        Node::PropNot(x) => {
            f.write_str("not ")?;
            // a directly nested `not` needs no parentheses
            match **x {
                Node::PropNot(_) => write_node(f, x),
                _ => operand(f, x, LEVEL_NOT),
            }
        }
        Node::LocalVarDecl(name, body) => {
            write!(f, "logic {name}; ")?;
            write_node(f, body)
        }
        Node::LocalVarAssign { seq, var, value } => {
            f.write_char('(')?;
            write_node(f, seq)?;
            write!(f, ", {var} = ")?;
            operand(f, value, LEVEL_OROR)?;
            f.write_char(')')
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, self)
    }
}

impl fmt::Display for AssertionUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@({})", self.clock)?;
        if let Some(cond) = &self.disable {
            write!(f, " disable iff ({cond})")?;
        }
        f.write_char(' ')?;
        write_node(f, &self.body)
    }
}

/// Canonical text of a unit: single spaces around binary operators, minimal
/// parentheses, clock first, then `disable iff`, then local declarations.
pub fn normalize(unit: &AssertionUnit) -> String {
    unit.to_string()
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;

    fn norm(text: &str) -> String {
        normalize(&parse(text).unwrap_or_else(|d| panic!("{text}: {d:?}")))
    }

    #[test]
    fn spacing_and_paren_elision() {
        assert_eq!(norm("@(posedge clk) a&&b |->c"), "@(posedge clk) a && b |-> c");
        assert_eq!(norm("@(posedge clk) (a) |-> (b)"), "@(posedge clk) a |-> b");
        assert_eq!(norm("@( posedge  clk )disable iff(rst)a|=>b"), "@(posedge clk) disable iff (rst) a |=> b");
    }

    #[test]
    fn required_parens_survive() {
        assert_eq!(norm("@(posedge c) (a || b) && c"), "@(posedge c) (a || b) && c");
        assert_eq!(norm("@(posedge c) (a ##1 b)[*2]"), "@(posedge c) (a ##1 b)[*2]");
        assert_eq!(norm("@(posedge c) a |-> (b |-> c)"), "@(posedge c) a |-> b |-> c");
        assert_eq!(norm("@(posedge c) (a |-> b) and c"), "@(posedge c) a |-> b and c");
        assert_eq!(norm("@(posedge c) a and (b or c)"), "@(posedge c) a and (b or c)");
    }

    #[test]
    fn not_is_parenthesized_under_operators() {
        assert_eq!(norm("@(posedge c) (not a) and b"), "@(posedge c) (not a) and b");
        assert_eq!(norm("@(posedge c) a |-> not (b until c)"), "@(posedge c) a |-> (not b until c)");
        assert_eq!(norm("@(posedge c) not not a"), "@(posedge c) not not a");
    }

    #[test]
    fn idempotent_on_samples() {
        for text in [
            "@(posedge clk) $rose(a) ##[1:$] b[->2] |=> c[=1] within d[*0:3]",
            "@(negedge clk) disable iff (rst) logic v; (a, v = d) ##1 (b == v) |-> ##2 !c",
            "@(posedge clk) a ##1 (##1 b) |-> $past(c, 3) != d",
        ] {
            let once = norm(text);
            assert_eq!(norm(&once), once);
        }
    }
}
