//! Rule trees: expressions over problem-state features that score
//! candidates. Printed and parsed in prefix form, e.g.
//! `(* SC (+ SCN 0.37))`.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

/// Problem-state features usable as leaves. The random-constant leaf is
/// not listed here: it is frozen into a [`Node::Const`] when a tree is
/// created, so evaluation stays deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    /// Number of posts set by the team.
    Npt,
    /// Remaining number of open posts.
    Rnp,
    /// Skill count of the candidate.
    Sc,
    /// Count of the candidate's skills that the team needs.
    Scn,
    /// Average skill count over all candidates.
    Ans,
    /// Number of skills required by the team.
    Nsr,
    /// Remaining candidates holding at least one team skill.
    Ncp,
    /// Minimum remaining supply over team skills still short of their
    /// headcount; 0 when none is short.
    Ncr,
    /// Summed willingness between the candidate and the seated members.
    Scw,
    /// Summed match scores of the seats filled so far.
    Smp,
    /// Largest competency weight of the candidate's best-matching open
    /// post.
    Wec,
}

impl Terminal {
    pub const ALL: [Terminal; 11] = [
        Terminal::Npt,
        Terminal::Rnp,
        Terminal::Sc,
        Terminal::Scn,
        Terminal::Ans,
        Terminal::Nsr,
        Terminal::Ncp,
        Terminal::Ncr,
        Terminal::Scw,
        Terminal::Smp,
        Terminal::Wec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Terminal::Npt => "NPT",
            Terminal::Rnp => "RNP",
            Terminal::Sc => "SC",
            Terminal::Scn => "SCN",
            Terminal::Ans => "ANS",
            Terminal::Nsr => "NSR",
            Terminal::Ncp => "NCP",
            Terminal::Ncr => "NCR",
            Terminal::Scw => "SCW",
            Terminal::Smp => "SMP",
            Terminal::Wec => "WEC",
        }
    }

    fn from_name(s: &str) -> Option<Terminal> {
        Terminal::ALL.iter().copied().find(|t| t.name() == s)
    }

    /// True when the feature changes while the team is being built.
    pub fn is_dynamic(self) -> bool {
        matches!(
            self,
            Terminal::Rnp
                | Terminal::Ncp
                | Terminal::Ncr
                | Terminal::Scw
                | Terminal::Smp
                | Terminal::Wec
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Sin,
    Cos,
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 2] = [UnaryOp::Sin, UnaryOp::Cos];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        self.apply_counted(x).0
    }

    /// As [`apply`](Self::apply), also reporting whether the raw result
    /// was non-finite and collapsed to zero.
    pub fn apply_counted(self, x: f64) -> (f64, bool) {
        let v = match self {
            UnaryOp::Sin => libm::sin(x),
            UnaryOp::Cos => libm::cos(x),
        };
        if v.is_finite() {
            (v, false)
        } else {
            (0.0, true)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    /// Protected division: a zero denominator yields 1.
    Div,
    Max,
    Min,
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 6] = [
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Mul,
        BinaryOp::Div,
        BinaryOp::Max,
        BinaryOp::Min,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Max => "max",
            BinaryOp::Min => "min",
        }
    }

    pub fn apply(self, a: f64, b: f64) -> f64 {
        self.apply_counted(a, b).0
    }

    /// As [`apply`](Self::apply), also reporting whether the raw result
    /// was non-finite and collapsed to zero. Overflowed or undefined
    /// intermediates collapse so every rule is total.
    pub fn apply_counted(self, a: f64, b: f64) -> (f64, bool) {
        let v = match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => {
                if b == 0.0 {
                    return (1.0, false);
                }
                a / b
            }
            BinaryOp::Max => a.max(b),
            BinaryOp::Min => a.min(b),
        };
        if v.is_finite() {
            (v, false)
        } else {
            (0.0, true)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Term(Terminal),
    Const(f64),
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
}

impl Node {
    pub fn size(&self) -> usize {
        match self {
            Node::Term(_) | Node::Const(_) => 1,
            Node::Unary(_, a) => 1 + a.size(),
            Node::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Edge depth: a lone leaf has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Node::Term(_) | Node::Const(_) => 0,
            Node::Unary(_, a) => 1 + a.depth(),
            Node::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Pre-order subtree access; `index` must be below `size()`.
    pub fn get(&self, index: usize) -> &Node {
        if index == 0 {
            return self;
        }
        let rest = index - 1;
        match self {
            Node::Term(_) | Node::Const(_) => unreachable!("index within tree"),
            Node::Unary(_, a) => a.get(rest),
            Node::Binary(_, a, b) => {
                let left = a.size();
                if rest < left {
                    a.get(rest)
                } else {
                    b.get(rest - left)
                }
            }
        }
    }

    /// Replaces the pre-order subtree at `index` with `subtree`.
    pub fn replace(&mut self, index: usize, subtree: Node) {
        if index == 0 {
            *self = subtree;
            return;
        }
        let rest = index - 1;
        match self {
            Node::Term(_) | Node::Const(_) => unreachable!("index within tree"),
            Node::Unary(_, a) => a.replace(rest, subtree),
            Node::Binary(_, a, b) => {
                let left = a.size();
                if rest < left {
                    a.replace(rest, subtree);
                } else {
                    b.replace(rest - left, subtree);
                }
            }
        }
    }

    /// First leaf in pre-order; used to hoist oversized subtrees.
    pub fn first_leaf(&self) -> Node {
        match self {
            Node::Term(_) | Node::Const(_) => self.clone(),
            Node::Unary(_, a) => a.first_leaf(),
            Node::Binary(_, a, _) => a.first_leaf(),
        }
    }

    pub fn contains_terminal(&self, t: Terminal) -> bool {
        match self {
            Node::Term(x) => *x == t,
            Node::Const(_) => false,
            Node::Unary(_, a) => a.contains_terminal(t),
            Node::Binary(_, a, b) => a.contains_terminal(t) || b.contains_terminal(t),
        }
    }

    pub fn contains_dynamic_terminal(&self) -> bool {
        match self {
            Node::Term(x) => x.is_dynamic(),
            Node::Const(_) => false,
            Node::Unary(_, a) => a.contains_dynamic_terminal(),
            Node::Binary(_, a, b) => {
                a.contains_dynamic_terminal() || b.contains_dynamic_terminal()
            }
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Term(t) => write!(f, "{}", t.name()),
            Node::Const(c) => write!(f, "{c}"),
            Node::Unary(op, a) => write!(f, "({} {a})", op.name()),
            Node::Binary(op, a, b) => write!(f, "({} {a} {b})", op.name()),
        }
    }
}

/// A rule individual: one expression tree.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTree {
    pub root: Node,
}

impl RuleTree {
    pub fn new(root: Node) -> Self {
        Self { root }
    }

    pub fn size(&self) -> usize {
        self.root.size()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Structural check: depth within `max_depth`. Arity correctness is
    /// guaranteed by the node representation itself.
    pub fn is_valid(&self, max_depth: usize) -> bool {
        self.depth() <= max_depth
    }
}

impl fmt::Display for RuleTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

// Rules travel as their prefix text.
#[cfg(feature = "serde")]
impl serde::Serialize for RuleTree {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for RuleTree {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = <alloc::string::String as serde::Deserialize>::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseError {
    UnexpectedEnd,
    UnexpectedToken(String),
    TrailingInput(String),
    UnknownOperator(String),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::UnexpectedEnd => write!(f, "unexpected end of rule text"),
            ParseError::UnexpectedToken(t) => write!(f, "unexpected token `{t}`"),
            ParseError::TrailingInput(t) => write!(f, "trailing input starting at `{t}`"),
            ParseError::UnknownOperator(t) => write!(f, "unknown operator `{t}`"),
        }
    }
}

impl core::error::Error for ParseError {}

impl FromStr for RuleTree {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        let mut tokens = tokenize(s);
        let root = parse_node(&mut tokens)?;
        if let Some(extra) = tokens.next() {
            return Err(ParseError::TrailingInput(extra.into()));
        }
        Ok(RuleTree::new(root))
    }
}

fn tokenize(s: &str) -> impl Iterator<Item = &str> {
    s.split_whitespace().flat_map(|word| {
        let mut parts = Vec::new();
        let mut rest = word;
        while let Some(stripped) = rest.strip_prefix('(') {
            parts.push("(");
            rest = stripped;
        }
        let mut closers = 0;
        while let Some(stripped) = rest.strip_suffix(')') {
            closers += 1;
            rest = stripped;
        }
        if !rest.is_empty() {
            parts.push(rest);
        }
        parts.extend(core::iter::repeat(")").take(closers));
        parts
    })
}

fn parse_node<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<Node, ParseError> {
    let tok = tokens.next().ok_or(ParseError::UnexpectedEnd)?;
    match tok {
        "(" => {
            let op = tokens.next().ok_or(ParseError::UnexpectedEnd)?;
            let node = if let Some(u) = UnaryOp::ALL.iter().copied().find(|u| u.name() == op) {
                Node::Unary(u, Box::new(parse_node(tokens)?))
            } else if let Some(b) = BinaryOp::ALL.iter().copied().find(|b| b.name() == op) {
                let lhs = parse_node(tokens)?;
                let rhs = parse_node(tokens)?;
                Node::Binary(b, Box::new(lhs), Box::new(rhs))
            } else {
                return Err(ParseError::UnknownOperator(op.into()));
            };
            match tokens.next() {
                Some(")") => Ok(node),
                Some(t) => Err(ParseError::UnexpectedToken(t.into())),
                None => Err(ParseError::UnexpectedEnd),
            }
        }
        ")" => Err(ParseError::UnexpectedToken(")".into())),
        name => {
            if let Some(t) = Terminal::from_name(name) {
                Ok(Node::Term(t))
            } else {
                name.parse::<f64>()
                    .map(Node::Const)
                    .map_err(|_| ParseError::UnexpectedToken(name.into()))
            }
        }
    }
}

/// Tree-construction method for the ramped initializer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowMethod {
    /// Internal nodes all the way to the target depth.
    Full,
    /// Leaves may appear early, but not above the minimum depth.
    Grow,
}

const LEAF_KINDS: usize = Terminal::ALL.len() + 1; // named features + random constant
const FUNC_KINDS: usize = UnaryOp::ALL.len() + BinaryOp::ALL.len();

fn random_leaf<R: Rng>(rng: &mut R) -> Node {
    let k = rng.gen_range(0..LEAF_KINDS);
    if k < Terminal::ALL.len() {
        Node::Term(Terminal::ALL[k])
    } else {
        // The random-constant leaf, frozen at creation.
        Node::Const(rng.gen_range(0.0..1.0))
    }
}

fn random_function<R: Rng>(rng: &mut R, arg: impl Fn(&mut R) -> Node) -> Node {
    let k = rng.gen_range(0..FUNC_KINDS);
    if k < UnaryOp::ALL.len() {
        Node::Unary(UnaryOp::ALL[k], Box::new(arg(rng)))
    } else {
        let op = BinaryOp::ALL[k - UnaryOp::ALL.len()];
        let lhs = arg(rng);
        let rhs = arg(rng);
        Node::Binary(op, Box::new(lhs), Box::new(rhs))
    }
}

/// Generates a random tree. `Full` reaches exactly `target_depth`; `Grow`
/// stays within it but never terminates above `min_depth`.
pub fn random_tree<R: Rng>(
    rng: &mut R,
    method: GrowMethod,
    target_depth: usize,
    min_depth: usize,
) -> Node {
    fn build<R: Rng>(rng: &mut R, method: GrowMethod, depth_left: usize, force: usize) -> Node {
        if depth_left == 0 {
            return random_leaf(rng);
        }
        let want_function = match method {
            GrowMethod::Full => true,
            // Uniform draw over the combined node pool.
            GrowMethod::Grow => force > 0 || rng.gen_range(0..LEAF_KINDS + FUNC_KINDS) < FUNC_KINDS,
        };
        if want_function {
            random_function(rng, |r| {
                build(r, method, depth_left - 1, force.saturating_sub(1))
            })
        } else {
            random_leaf(rng)
        }
    }
    build(rng, method, target_depth, min_depth)
}

/// Random subtree for mutation: grow-generated, no minimum depth.
pub fn random_subtree<R: Rng>(rng: &mut R, max_depth: usize) -> Node {
    random_tree(rng, GrowMethod::Grow, max_depth, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamId};
    use alloc::string::ToString;

    fn parse(s: &str) -> RuleTree {
        s.parse().unwrap()
    }

    #[test]
    fn print_parse_round_trip() {
        let texts = [
            "SC",
            "0.37",
            "(* SC (+ SCN 0.37))",
            "(max (sin NPT) (/ SCW (- SMP WEC)))",
            "(min ANS (cos (+ NCR NCP)))",
        ];
        for t in texts {
            let tree = parse(t);
            assert_eq!(tree.to_string(), *t);
        }
    }

    #[test]
    fn round_trip_random_trees() {
        let mut rng = stream(2, StreamId::Test);
        for i in 0..500 {
            let method = if i % 2 == 0 { GrowMethod::Full } else { GrowMethod::Grow };
            let tree = RuleTree::new(random_tree(&mut rng, method, 2 + i % 5, 2));
            let text = tree.to_string();
            let back: RuleTree = text.parse().unwrap();
            assert_eq!(back, tree, "{text}");
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!("".parse::<RuleTree>(), Err(ParseError::UnexpectedEnd)));
        assert!(matches!("(+ SC)".parse::<RuleTree>(), Err(ParseError::UnexpectedToken(_))));
        assert!(matches!("(bogus SC SC)".parse::<RuleTree>(), Err(ParseError::UnknownOperator(_))));
        assert!(matches!("SC SC".parse::<RuleTree>(), Err(ParseError::TrailingInput(_))));
        assert!(matches!("PLQ".parse::<RuleTree>(), Err(ParseError::UnexpectedToken(_))));
    }

    #[test]
    fn depth_and_size() {
        let tree = parse("(* SC (+ SCN 0.37))");
        assert_eq!(tree.size(), 5);
        assert_eq!(tree.depth(), 2);
        assert_eq!(parse("SC").depth(), 0);
    }

    #[test]
    fn preorder_access_and_replace() {
        let mut tree = parse("(* SC (+ SCN 0.37))");
        assert_eq!(tree.root.get(0).to_string(), "(* SC (+ SCN 0.37))");
        assert_eq!(tree.root.get(1).to_string(), "SC");
        assert_eq!(tree.root.get(2).to_string(), "(+ SCN 0.37)");
        assert_eq!(tree.root.get(3).to_string(), "SCN");
        assert_eq!(tree.root.get(4).to_string(), "0.37");
        tree.root.replace(3, Node::Term(Terminal::Wec));
        assert_eq!(tree.to_string(), "(* SC (+ WEC 0.37))");
    }

    #[test]
    fn full_trees_hit_target_depth() {
        let mut rng = stream(4, StreamId::Test);
        for d in 2..=6 {
            for _ in 0..20 {
                let t = random_tree(&mut rng, GrowMethod::Full, d, 2);
                assert_eq!(t.depth(), d);
            }
        }
    }

    #[test]
    fn grow_trees_respect_bounds() {
        let mut rng = stream(5, StreamId::Test);
        for d in 2..=6 {
            for _ in 0..50 {
                let t = random_tree(&mut rng, GrowMethod::Grow, d, 2);
                assert!(t.depth() >= 2 && t.depth() <= d, "depth {} not in [2, {d}]", t.depth());
            }
        }
    }

    #[test]
    fn dynamic_terminal_detection() {
        assert!(!parse("(* SC (+ SCN ANS))").root.contains_dynamic_terminal());
        assert!(parse("(* SC (+ RNP ANS))").root.contains_dynamic_terminal());
        assert!(parse("(/ SMP 2)").root.contains_terminal(Terminal::Smp));
    }
}
