//! Conditionals read off from vanishing probabilities, their transitive and
//! pairwise-conjunctive closure, broken arrows, and outcome/setting relabeling.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::correlations::{Cell, CorrelationArray, Outcome, Side};
use crate::error::{Error, Result};
use crate::qstate::Setting;

/// "Party `side` measured `setting` and found `outcome`".
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Proposition {
    pub side: Side,
    pub setting: String,
    pub outcome: Outcome,
}

impl Proposition {
    pub fn new(side: Side, setting: impl Into<String>, outcome: Outcome) -> Self {
        Self {
            side,
            setting: setting.into(),
            outcome,
        }
    }

    pub fn alice(setting: impl Into<String>, outcome: Outcome) -> Self {
        Self::new(Side::Alice, setting, outcome)
    }

    pub fn bob(setting: impl Into<String>, outcome: Outcome) -> Self {
        Self::new(Side::Bob, setting, outcome)
    }

    pub fn negate(&self) -> Self {
        Self {
            outcome: self.outcome.flip(),
            ..self.clone()
        }
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}_{{{}{}}}",
            self.side.letter(),
            self.setting,
            self.outcome.symbol()
        )
    }
}

/// A single proposition or a conjunction of two, Alice's first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Clause(Vec<Proposition>);

impl Clause {
    pub fn single(p: Proposition) -> Self {
        Self(vec![p])
    }

    pub fn and(p: Proposition, q: Proposition) -> Self {
        let mut v = vec![p, q];
        v.sort();
        Self(v)
    }

    pub fn propositions(&self) -> &[Proposition] {
        &self.0
    }

    fn all_plus(&self) -> bool {
        self.0.iter().all(|p| p.outcome == Outcome::Plus)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        if parts.len() == 1 {
            f.write_str(&parts[0])
        } else {
            write!(f, "({})", parts.join(" & "))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Conditional {
    pub antecedent: Clause,
    pub consequent: Clause,
}

impl Conditional {
    pub fn new(antecedent: Clause, consequent: Clause) -> Self {
        Self {
            antecedent,
            consequent,
        }
    }

    pub fn simple(p: Proposition, q: Proposition) -> Self {
        Self::new(Clause::single(p), Clause::single(q))
    }
}

impl fmt::Display for Conditional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.antecedent, self.consequent)
    }
}

/// What one vanishing cell entry says.
///
/// `Pr(+−|st) = 0` reads as `A_{s+} → B_{t+}`, `Pr(−+|st) = 0` as
/// `B_{t+} → A_{s+}`; vanishing `++` or `−−` entries forbid the conjunction.
/// Each rule is equivalent to two single-proposition conditionals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rule {
    Implies {
        antecedent: Proposition,
        consequent: Proposition,
        zero_entry: Event,
    },
    Excludes {
        first: Proposition,
        second: Proposition,
        zero_entry: Event,
    },
}

impl Rule {
    pub fn zero_entry(&self) -> &Event {
        match self {
            Rule::Implies { zero_entry, .. } | Rule::Excludes { zero_entry, .. } => zero_entry,
        }
    }

    /// The rule as the two directed conditionals it licenses.
    pub fn conditionals(&self) -> [Conditional; 2] {
        match self {
            Rule::Implies {
                antecedent,
                consequent,
                ..
            } => [
                Conditional::simple(antecedent.clone(), consequent.clone()),
                Conditional::simple(consequent.negate(), antecedent.negate()),
            ],
            Rule::Excludes { first, second, .. } => [
                Conditional::simple(first.clone(), second.negate()),
                Conditional::simple(second.clone(), first.negate()),
            ],
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Implies {
                antecedent,
                consequent,
                ..
            } => write!(f, "{antecedent} -> {consequent}"),
            Rule::Excludes { first, second, .. } => write!(f, "not ({first} & {second})"),
        }
    }
}

/// A joint outcome for one pair of settings, e.g. `+-|aa`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Event {
    pub setting_a: String,
    pub setting_b: String,
    pub outcome_a: Outcome,
    pub outcome_b: Outcome,
}

impl Event {
    fn of(p: &Proposition, q: &Proposition) -> Option<Self> {
        let (a, b) = match (p.side, q.side) {
            (Side::Alice, Side::Bob) => (p, q),
            (Side::Bob, Side::Alice) => (q, p),
            _ => return None,
        };
        Some(Self {
            setting_a: a.setting.clone(),
            setting_b: b.setting.clone(),
            outcome_a: a.outcome,
            outcome_b: b.outcome,
        })
    }

    pub fn probability(&self, array: &CorrelationArray) -> Option<f64> {
        array
            .cell_by_label(&self.setting_a, &self.setting_b)
            .map(|c| c.get(self.outcome_a, self.outcome_b))
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}|{}{}",
            self.outcome_a.symbol(),
            self.outcome_b.symbol(),
            self.setting_a,
            self.setting_b
        )
    }
}

/// Reads one rule off each cell entry below `tol`, in row-major cell order.
pub fn extract_conditionals(array: &CorrelationArray, tol: f64) -> Vec<Rule> {
    use Outcome::{Minus, Plus};
    let mut rules = Vec::new();
    for (i, sa) in array.settings_a().iter().enumerate() {
        for (j, sb) in array.settings_b().iter().enumerate() {
            let cell = array.cell(i, j);
            for (x, y) in [(Plus, Plus), (Plus, Minus), (Minus, Plus), (Minus, Minus)] {
                if cell.get(x, y) >= tol {
                    continue;
                }
                let zero_entry = Event {
                    setting_a: sa.label.clone(),
                    setting_b: sb.label.clone(),
                    outcome_a: x,
                    outcome_b: y,
                };
                let a = |o| Proposition::alice(sa.label.clone(), o);
                let b = |o| Proposition::bob(sb.label.clone(), o);
                rules.push(match (x, y) {
                    (Plus, Minus) => Rule::Implies {
                        antecedent: a(Plus),
                        consequent: b(Plus),
                        zero_entry,
                    },
                    (Minus, Plus) => Rule::Implies {
                        antecedent: b(Plus),
                        consequent: a(Plus),
                        zero_entry,
                    },
                    (o, _) => Rule::Excludes {
                        first: a(o),
                        second: b(o),
                        zero_entry,
                    },
                });
            }
        }
    }
    rules
}

/// An entailed conditional together with the direct conditionals it was
/// derived from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entailment {
    pub conditional: Conditional,
    pub support: Vec<Conditional>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrokenArrow {
    pub antecedent: Clause,
    pub consequent: Clause,
    /// The jointly measurable event making the antecedent true and the
    /// consequent false.
    pub witness_outcome: Event,
    pub witness_probability: f64,
    /// Direct conditionals behind the entailment, in chain order.
    pub support: Vec<Conditional>,
    /// Other entailed conditionals broken by the same event.
    pub equivalent_forms: Vec<Conditional>,
}

impl BrokenArrow {
    pub fn conditional(&self) -> Conditional {
        Conditional::new(self.antecedent.clone(), self.consequent.clone())
    }
}

/// An entailed conditional whose antecedent never occurs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vacuous {
    pub conditional: Conditional,
    pub antecedent_probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub conditionals: Vec<Rule>,
    pub entailed: Vec<Entailment>,
    pub broken: Vec<BrokenArrow>,
    pub vacuous: Vec<Vacuous>,
}

struct Graph {
    props: Vec<Proposition>,
    /// Outgoing edges as (target node, direct conditional).
    edges: Vec<Vec<(usize, Conditional)>>,
}

impl Graph {
    fn new(array: &CorrelationArray, rules: &[Rule]) -> Self {
        let mut props = Vec::new();
        for side in [Side::Alice, Side::Bob] {
            for s in array.settings(side) {
                for o in Outcome::BOTH {
                    props.push(Proposition::new(side, s.label.clone(), o));
                }
            }
        }
        let mut edges = vec![Vec::new(); props.len()];
        for rule in rules {
            for c in rule.conditionals() {
                let from = props.iter().position(|p| p == &c.antecedent.0[0]).unwrap();
                let to = props.iter().position(|p| p == &c.consequent.0[0]).unwrap();
                if !edges[from].iter().any(|(t, _)| *t == to) {
                    edges[from].push((to, c));
                }
            }
        }
        Self { props, edges }
    }

    /// Shortest derivation from `start` to every reachable node.
    fn reach(&self, start: usize) -> Vec<(usize, Vec<Conditional>)> {
        let mut parent: Vec<Option<(usize, &Conditional)>> = vec![None; self.props.len()];
        let mut seen = vec![false; self.props.len()];
        seen[start] = true;
        let mut order = Vec::new();
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for (v, c) in &self.edges[u] {
                if !seen[*v] {
                    seen[*v] = true;
                    parent[*v] = Some((u, c));
                    order.push(*v);
                    queue.push_back(*v);
                }
            }
        }
        order
            .into_iter()
            .map(|v| {
                let mut path = Vec::new();
                let mut cur = v;
                while let Some((u, c)) = parent[cur] {
                    path.push(c.clone());
                    cur = u;
                }
                path.reverse();
                (v, path)
            })
            .collect()
    }
}

fn marginal(array: &CorrelationArray, p: &Proposition) -> f64 {
    let i = array
        .index_of(p.side, &p.setting)
        .expect("proposition from array");
    let cell: &Cell = match p.side {
        Side::Alice => array.cell(i, 0),
        Side::Bob => array.cell(0, i),
    };
    cell.marginal(p.side, p.outcome)
}

fn joint(array: &CorrelationArray, p: &Proposition, q: &Proposition) -> Option<(Event, f64)> {
    let e = Event::of(p, q)?;
    let prob = e.probability(array)?;
    Some((e, prob))
}

/// An entailed conditional with its supporting chain.
type Supported = (Conditional, Vec<Conditional>);

/// Closes the extracted conditionals under transitivity and pairwise
/// conjunction and reports every entailed conditional the array breaks.
///
/// Broken arrows are grouped by witness event. The reported form prefers
/// clauses of "+" outcomes only, then fewer propositions; the rest are kept
/// as `equivalent_forms`.
pub fn find_broken_arrows(array: &CorrelationArray, tol: f64) -> ChainReport {
    let rules = extract_conditionals(array, tol);
    let graph = Graph::new(array, &rules);
    let closure: Vec<(usize, usize, Vec<Conditional>)> = (0..graph.props.len())
        .flat_map(|u| {
            graph
                .reach(u)
                .into_iter()
                .map(move |(v, path)| (u, v, path))
        })
        .filter(|(u, v, _)| u != v)
        .collect();

    let mut entailed = Vec::new();
    let mut vacuous = Vec::new();
    let mut groups: BTreeMap<Event, (f64, Vec<Supported>)> = BTreeMap::new();
    let mut record = |event: Event, prob: f64, c: Conditional, support: Vec<Conditional>| {
        groups
            .entry(event)
            .or_insert((prob, Vec::new()))
            .1
            .push((c, support));
    };

    for (u, v, path) in &closure {
        let (p, q) = (&graph.props[*u], &graph.props[*v]);
        let c = Conditional::simple(p.clone(), q.clone());
        if path.len() > 1 {
            entailed.push(Entailment {
                conditional: c.clone(),
                support: path.clone(),
            });
        }
        let Some((event, prob)) = joint(array, p, &q.negate()) else {
            continue;
        };
        let p_ante = marginal(array, p);
        if p_ante < tol {
            vacuous.push(Vacuous {
                conditional: c,
                antecedent_probability: p_ante,
            });
        } else if prob > tol {
            record(event, prob, c, path.clone());
        }
    }

    for (k, (u1, v1, path1)) in closure.iter().enumerate() {
        for (u2, v2, path2) in &closure[k + 1..] {
            let (p1, q1) = (&graph.props[*u1], &graph.props[*v1]);
            let (p2, q2) = (&graph.props[*u2], &graph.props[*v2]);
            if p1.side == p2.side || q1.side == q2.side {
                continue;
            }
            let (Some((_, p_cons)), Some((event, p_ante))) =
                (joint(array, q1, q2), joint(array, p1, p2))
            else {
                continue;
            };
            if p_cons >= tol {
                continue;
            }
            let c = Conditional::new(
                Clause::and(p1.clone(), p2.clone()),
                Clause::and(q1.clone(), q2.clone()),
            );
            let support: Vec<Conditional> = path1.iter().chain(path2).cloned().collect();
            entailed.push(Entailment {
                conditional: c.clone(),
                support: support.clone(),
            });
            if p_ante < tol {
                vacuous.push(Vacuous {
                    conditional: c,
                    antecedent_probability: p_ante,
                });
            } else {
                record(event, p_ante, c, support);
            }
        }
    }

    let broken = groups
        .into_iter()
        .map(|(event, (prob, mut forms))| {
            forms.sort_by_key(|(c, _)| {
                let all_plus = c.antecedent.all_plus() && c.consequent.all_plus();
                (!all_plus, c.antecedent.0.len() + c.consequent.0.len())
            });
            let (primary, support) = forms.remove(0);
            BrokenArrow {
                antecedent: primary.antecedent,
                consequent: primary.consequent,
                witness_outcome: event,
                witness_probability: prob,
                support,
                equivalent_forms: forms.into_iter().map(|(c, _)| c).collect(),
            }
        })
        .collect();

    ChainReport {
        conditionals: rules,
        entailed,
        broken,
        vacuous,
    }
}

/// Where one output setting comes from, and whether its outcomes swap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    pub target: String,
    pub source: String,
    pub flip: bool,
}

impl LabelMap {
    pub fn new(target: impl Into<String>, source: impl Into<String>, flip: bool) -> Self {
        Self {
            target: target.into(),
            source: source.into(),
            flip,
        }
    }
}

/// Setting permutations and outcome flips for both parties. Entries are
/// listed in output order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relabeling {
    pub alice: Vec<LabelMap>,
    pub bob: Vec<LabelMap>,
}

impl Relabeling {
    pub fn identity(array: &CorrelationArray) -> Self {
        let same = |ss: &[Setting]| {
            ss.iter()
                .map(|s| LabelMap::new(&*s.label, &*s.label, false))
                .collect()
        };
        Self {
            alice: same(array.settings_a()),
            bob: same(array.settings_b()),
        }
    }

    /// Turns the Hardy-Unruh array at `α` into the Hardy array at `π/2 − α`.
    ///
    /// Alice swaps her settings and flips the outcomes of her new `a`; Bob
    /// swaps his settings and flips the outcomes of his new `b`.
    pub fn hu_to_hardy() -> Self {
        Self {
            alice: vec![
                LabelMap::new("a", "b", true),
                LabelMap::new("b", "a", false),
            ],
            bob: vec![
                LabelMap::new("a", "b", false),
                LabelMap::new("b", "a", true),
            ],
        }
    }

    pub fn inverse(&self) -> Self {
        let inv = |m: &[LabelMap]| {
            let mut v: Vec<LabelMap> = m
                .iter()
                .map(|e| LabelMap::new(&*e.source, &*e.target, e.flip))
                .collect();
            // Labels shared by source and target keep their original order.
            v.sort_by_key(|e| {
                m.iter()
                    .position(|f| f.target == e.target)
                    .unwrap_or(usize::MAX)
            });
            v
        };
        Self {
            alice: inv(&self.alice),
            bob: inv(&self.bob),
        }
    }
}

fn resolve(side: Side, settings: &[Setting], map: &[LabelMap]) -> Result<Vec<(usize, bool)>> {
    if map.len() != settings.len() {
        return Err(Error::NotBijective(format!(
            "{side}: {} entries for {} settings",
            map.len(),
            settings.len()
        )));
    }
    let mut used = vec![false; settings.len()];
    let mut out = Vec::with_capacity(map.len());
    for (k, e) in map.iter().enumerate() {
        let i = settings
            .iter()
            .position(|s| s.label == e.source)
            .ok_or_else(|| {
                Error::NotBijective(format!("{side}: unknown setting `{}`", e.source))
            })?;
        if used[i] {
            return Err(Error::NotBijective(format!(
                "{side}: `{}` used twice",
                e.source
            )));
        }
        if map[..k].iter().any(|f| f.target == e.target) {
            return Err(Error::NotBijective(format!(
                "{side}: duplicate target `{}`",
                e.target
            )));
        }
        used[i] = true;
        out.push((i, e.flip));
    }
    Ok(out)
}

/// Applies `map`; output settings carry only the new labels.
pub fn relabel_array(array: &CorrelationArray, map: &Relabeling) -> Result<CorrelationArray> {
    let ra = resolve(Side::Alice, array.settings_a(), &map.alice)?;
    let rb = resolve(Side::Bob, array.settings_b(), &map.bob)?;
    let mut cells = Vec::with_capacity(ra.len() * rb.len());
    for &(i, fa) in &ra {
        for &(j, fb) in &rb {
            let old = array.cell(i, j);
            let mut p = [0.0; 4];
            for x in Outcome::BOTH {
                for y in Outcome::BOTH {
                    let sx = if fa { x.flip() } else { x };
                    let sy = if fb { y.flip() } else { y };
                    p[2 * x.index() + y.index()] = old.get(sx, sy);
                }
            }
            cells.push(Cell::new(p)?);
        }
    }
    let labels = |m: &[LabelMap]| m.iter().map(|e| Setting::label_only(&*e.target)).collect();
    CorrelationArray::new(labels(&map.alice), labels(&map.bob), cells)
}
