//! Classical-logic argumentation over a truthfulness report: argument
//! construction, attack wiring, tree marking, judging, dialogue rendering
//! and tree export.
//!
//! Arguments are instantiated from six fixed schemas rather than derived by
//! general theorem proving; the dialectic these schemas generate is finite
//! and fully determined by the report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::investigator::{expected_direction, Alt, Exp, TruthReport};

#[derive(Debug, Error)]
pub enum ArgError {
    #[error("report covers no features")]
    EmptyReport,
    #[error("unknown export format '{0}'")]
    UnknownFormat(String),
    #[error("malformed structured tree: {0}")]
    Malformed(String),
}

/// An elementary natural-language claim of the dialectic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AtomKind {
    /// a: the explanation is untrusted.
    Untrusted,
    /// b: the explanation is trusted.
    Trusted,
    /// c_j: the importance of feature j is untruthful.
    Untruthful { feature: usize },
    /// d_j: the importance of feature j is truthful.
    Truthful { feature: usize },
    /// e_{j,ALT}: the expected response to altering feature j.
    Expectation { feature: usize, alt: Alt },
    /// f_{j,ALT}: the evaluated response to altering feature j.
    Evaluation { feature: usize, alt: Alt },
}

/// An atom together with its bound natural-language text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub kind: AtomKind,
    pub text: String,
}

impl Atom {
    pub fn new(kind: AtomKind, text: impl Into<String>) -> Atom {
        Atom {
            kind,
            text: text.into(),
        }
    }
}

/// Support and claim elements. `Implies` encodes
/// `premises_1 and ... and premises_k -> not negates`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Formula {
    Atom(Atom),
    Not(Atom),
    Implies { premises: Vec<Atom>, negates: Atom },
}

/// Identity of an argument schema instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArgumentId {
    A1,
    A2,
    A3,
    A4(usize),
    A5(usize),
    A6(usize, Alt),
}

impl std::fmt::Display for ArgumentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArgumentId::A1 => write!(f, "a1"),
            ArgumentId::A2 => write!(f, "a2"),
            ArgumentId::A3 => write!(f, "a3"),
            ArgumentId::A4(j) => write!(f, "a4({j})"),
            ArgumentId::A5(j) => write!(f, "a5({j})"),
            ArgumentId::A6(j, alt) => write!(
                f,
                "a6({j},{})",
                match alt {
                    Alt::Increasing => "inc",
                    Alt::Decreasing => "dec",
                }
            ),
        }
    }
}

/// A (support, claim) pair instantiated from one of the fixed schemas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Argument {
    pub id: ArgumentId,
    pub support: Vec<Formula>,
    pub claim: Formula,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackKind {
    Rebuttal,
    Undercut,
}

impl std::fmt::Display for AttackKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AttackKind::Rebuttal => write!(f, "rebuttal"),
            AttackKind::Undercut => write!(f, "undercut"),
        }
    }
}

/// A typed attack between two nodes of a tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackEdge {
    pub attacker: usize,
    pub target: usize,
    pub kind: AttackKind,
}

/// Undefeated / defeated node labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mark {
    U,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Judgement {
    Warranted,
    Unwarranted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub argument: Argument,
    pub mark: Option<Mark>,
    pub parent: Option<usize>,
    /// Kind of the attack this node mounts on its parent.
    pub attack: Option<AttackKind>,
    pub children: Vec<usize>,
}

/// Argument tree: the root claim attacked by counterarguments, recursively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgumentTree {
    pub nodes: Vec<TreeNode>,
}

impl ArgumentTree {
    pub fn new(root: Argument) -> ArgumentTree {
        ArgumentTree {
            nodes: vec![TreeNode {
                argument: root,
                mark: None,
                parent: None,
                attack: None,
                children: Vec::new(),
            }],
        }
    }

    /// Attach `argument` as an attacker of `parent`; returns the new index.
    pub fn add_child(&mut self, parent: usize, argument: Argument, kind: AttackKind) -> usize {
        let idx = self.nodes.len();
        self.nodes.push(TreeNode {
            argument,
            mark: None,
            parent: Some(parent),
            attack: Some(kind),
            children: Vec::new(),
        });
        self.nodes[parent].children.push(idx);
        idx
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn is_marked(&self) -> bool {
        self.nodes.iter().all(|n| n.mark.is_some())
    }

    /// All attack edges (attacker node index -> target node index).
    pub fn edges(&self) -> Vec<AttackEdge> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| {
                Some(AttackEdge {
                    attacker: i,
                    target: n.parent?,
                    kind: n.attack?,
                })
            })
            .collect()
    }
}

// --- natural-language templates -------------------------------------------

fn article_imp(word: &str) -> &'static str {
    // "an" before a vowel sound; all current influence words take "a".
    match word.chars().next() {
        Some('A' | 'E' | 'I' | 'O' | 'U') => "an",
        _ => "a",
    }
}

fn atom_a() -> Atom {
    Atom::new(AtomKind::Untrusted, "The explanation is untrusted")
}

fn atom_b() -> Atom {
    Atom::new(AtomKind::Trusted, "The explanation is trusted")
}

fn atom_c(feature: usize, name: &str) -> Atom {
    Atom::new(
        AtomKind::Untruthful { feature },
        format!("The importance of {name} is untruthful"),
    )
}

fn atom_d(feature: usize, name: &str, imp_word: &str, exp_inc: Exp, exp_dec: Exp) -> Atom {
    Atom::new(
        AtomKind::Truthful { feature },
        format!(
            "The importance of {name} is truthful since it has {} {imp_word} influence, \
             and when its value is Increasing locally, we observe that the probability is {}, \
             and when its value is Decreasing locally, we observe that the probability is {}",
            article_imp(imp_word),
            exp_inc.word(),
            exp_dec.word()
        ),
    )
}

fn atom_e(feature: usize, name: &str, imp_word: &str, alt: Alt, expected: Exp) -> Atom {
    Atom::new(
        AtomKind::Expectation { feature, alt },
        format!(
            "{name} has {} {imp_word} influence and is therefore expected the probability \
             to be {} by {} its value",
            article_imp(imp_word),
            expected.participle(),
            alt.word()
        ),
    )
}

fn atom_f(feature: usize, name: &str, alt: Alt, observed: Exp, matched: bool) -> Atom {
    let suffix = if matched { " as expected" } else { "" };
    Atom::new(
        AtomKind::Evaluation { feature, alt },
        format!(
            "{name}'s value got {} and evaluated and the probability is {}{suffix}",
            alt.participle(),
            observed.participle()
        ),
    )
}

// --- argument schemas ------------------------------------------------------

fn arg_initial() -> Argument {
    let a = atom_a();
    Argument {
        id: ArgumentId::A1,
        support: vec![Formula::Atom(a.clone())],
        claim: Formula::Atom(a),
    }
}

fn arg_trusted_rebuttal() -> Argument {
    let a = atom_a();
    let b = atom_b();
    Argument {
        id: ArgumentId::A2,
        support: vec![
            Formula::Atom(b.clone()),
            Formula::Implies {
                premises: vec![b],
                negates: a.clone(),
            },
        ],
        claim: Formula::Not(a),
    }
}

fn arg_challenge_all(report: &TruthReport) -> Argument {
    let cs: Vec<Atom> = report
        .evidence
        .iter()
        .map(|ev| atom_c(ev.feature_index, &ev.feature_name))
        .collect();
    let b = atom_b();
    let mut support: Vec<Formula> = cs.iter().cloned().map(Formula::Atom).collect();
    support.push(Formula::Implies {
        premises: cs,
        negates: b.clone(),
    });
    Argument {
        id: ArgumentId::A3,
        support,
        claim: Formula::Not(b),
    }
}

fn arg_defend_feature(ev: &crate::investigator::FeatureEvidence) -> Argument {
    let d = atom_d(
        ev.feature_index,
        &ev.feature_name,
        ev.imp.word(),
        expected_direction(ev.imp, Alt::Increasing),
        expected_direction(ev.imp, Alt::Decreasing),
    );
    let c = atom_c(ev.feature_index, &ev.feature_name);
    Argument {
        id: ArgumentId::A4(ev.feature_index),
        support: vec![
            Formula::Atom(d.clone()),
            Formula::Implies {
                premises: vec![d],
                negates: c.clone(),
            },
        ],
        claim: Formula::Not(c),
    }
}

fn arg_demand_proof(ev: &crate::investigator::FeatureEvidence) -> Argument {
    let e_inc = atom_e(
        ev.feature_index,
        &ev.feature_name,
        ev.imp.word(),
        Alt::Increasing,
        expected_direction(ev.imp, Alt::Increasing),
    );
    let e_dec = atom_e(
        ev.feature_index,
        &ev.feature_name,
        ev.imp.word(),
        Alt::Decreasing,
        expected_direction(ev.imp, Alt::Decreasing),
    );
    let d = atom_d(
        ev.feature_index,
        &ev.feature_name,
        ev.imp.word(),
        expected_direction(ev.imp, Alt::Increasing),
        expected_direction(ev.imp, Alt::Decreasing),
    );
    Argument {
        id: ArgumentId::A5(ev.feature_index),
        support: vec![
            Formula::Atom(e_inc.clone()),
            Formula::Atom(e_dec.clone()),
            Formula::Implies {
                premises: vec![e_inc, e_dec],
                negates: d.clone(),
            },
        ],
        claim: Formula::Not(d),
    }
}

fn arg_evaluated(ev: &crate::investigator::FeatureEvidence, alt: Alt) -> Argument {
    let record = ev.record(alt);
    let f = atom_f(
        ev.feature_index,
        &ev.feature_name,
        alt,
        record.observed,
        record.matched(),
    );
    let e = atom_e(
        ev.feature_index,
        &ev.feature_name,
        ev.imp.word(),
        alt,
        record.expected,
    );
    Argument {
        id: ArgumentId::A6(ev.feature_index, alt),
        support: vec![
            Formula::Atom(f.clone()),
            Formula::Implies {
                premises: vec![f],
                negates: e.clone(),
            },
        ],
        claim: Formula::Not(e),
    }
}

/// Build the argument tree for a report.
///
/// The root claims the explanation untrusted; the trusted rebuttal, the
/// per-feature challenges and the proof demands always follow. The final
/// evaluation arguments answer the proof demands only when the system can
/// provide all of them, i.e. when every feature passed both of its tests;
/// with any test failed the demands stand unanswered and the root claim
/// survives judging.
pub fn build_tree(report: &TruthReport) -> Result<ArgumentTree, ArgError> {
    if report.evidence.is_empty() {
        return Err(ArgError::EmptyReport);
    }
    let mut tree = ArgumentTree::new(arg_initial());
    let a2 = tree.add_child(0, arg_trusted_rebuttal(), AttackKind::Rebuttal);
    let a3 = tree.add_child(a2, arg_challenge_all(report), AttackKind::Undercut);

    let fully_truthful = report.untruthful.is_empty();
    for ev in &report.evidence {
        let a4 = tree.add_child(a3, arg_defend_feature(ev), AttackKind::Undercut);
        let a5 = tree.add_child(a4, arg_demand_proof(ev), AttackKind::Undercut);
        if fully_truthful {
            for alt in [Alt::Increasing, Alt::Decreasing] {
                tree.add_child(a5, arg_evaluated(ev, alt), AttackKind::Undercut);
            }
        }
    }
    Ok(tree)
}

/// Mark every node: leaves are U; an inner node is D iff some child is U.
pub fn mark(mut tree: ArgumentTree) -> ArgumentTree {
    // Iterative post-order over the arena.
    let mut order: Vec<usize> = Vec::with_capacity(tree.nodes.len());
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        order.push(i);
        stack.extend(&tree.nodes[i].children);
    }
    for &i in order.iter().rev() {
        let defeated = tree.nodes[i]
            .children
            .iter()
            .any(|&c| tree.nodes[c].mark == Some(Mark::U));
        tree.nodes[i].mark = Some(if defeated { Mark::D } else { Mark::U });
    }
    tree
}

/// Judge a marked tree: Unwarranted iff the root is defeated.
///
/// Unwarranted means the initial "untrusted" claim failed, i.e. the
/// explanation is trusted as it stands.
///
/// Panics if the tree has not been marked.
pub fn judge(tree: &ArgumentTree) -> Judgement {
    match tree
        .root()
        .mark
        .expect("tree must be marked before judging")
    {
        Mark::D => Judgement::Unwarranted,
        Mark::U => Judgement::Warranted,
    }
}

// --- dialogue rendering ----------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    User,
    System,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueTurn {
    pub speaker: Speaker,
    pub text: String,
}

/// Render the dialectic as alternating user/system turns.
///
/// One turn per argument level and instance: the opening challenge, the
/// trusted reply, the bundled per-feature challenge, one defence per
/// feature, one proof demand per feature, and one evaluation turn per
/// (feature, alteration) reporting the observed movement with the recorded
/// probabilities.
pub fn render_dialogue(tree: &ArgumentTree, report: &TruthReport) -> Vec<DialogueTurn> {
    assert!(tree.is_marked(), "render_dialogue requires a marked tree");
    let mut turns = Vec::with_capacity(3 + 4 * report.evidence.len());

    turns.push(DialogueTurn {
        speaker: Speaker::User,
        text: atom_a().text,
    });
    turns.push(DialogueTurn {
        speaker: Speaker::System,
        text: atom_b().text,
    });

    let challenge = report
        .evidence
        .iter()
        .map(|ev| atom_c(ev.feature_index, &ev.feature_name).text)
        .collect::<Vec<_>>()
        .join(". ");
    turns.push(DialogueTurn {
        speaker: Speaker::User,
        text: challenge,
    });

    for ev in &report.evidence {
        let d = atom_d(
            ev.feature_index,
            &ev.feature_name,
            ev.imp.word(),
            expected_direction(ev.imp, Alt::Increasing),
            expected_direction(ev.imp, Alt::Decreasing),
        );
        turns.push(DialogueTurn {
            speaker: Speaker::System,
            text: d.text,
        });
    }

    for ev in &report.evidence {
        let text = [Alt::Increasing, Alt::Decreasing]
            .map(|alt| {
                atom_e(
                    ev.feature_index,
                    &ev.feature_name,
                    ev.imp.word(),
                    alt,
                    expected_direction(ev.imp, alt),
                )
                .text
            })
            .join(". ");
        turns.push(DialogueTurn {
            speaker: Speaker::User,
            text,
        });
    }

    for ev in &report.evidence {
        for alt in [Alt::Increasing, Alt::Decreasing] {
            let record = ev.record(alt);
            let base = atom_f(
                ev.feature_index,
                &ev.feature_name,
                alt,
                record.observed,
                record.matched(),
            )
            .text;
            turns.push(DialogueTurn {
                speaker: Speaker::System,
                text: format!(
                    "{base} ({:.4} -> {:.4})",
                    record.probability_before, record.probability_after
                ),
            });
        }
    }
    turns
}

/// Join dialogue turns into a plain-text transcript.
pub fn dialogue_text(turns: &[DialogueTurn]) -> String {
    turns
        .iter()
        .map(|t| {
            let who = match t.speaker {
                Speaker::User => "User",
                Speaker::System => "System",
            };
            format!("{who}: {}", t.text)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

// --- exports ----------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Text,
    Dot,
    Structured,
}

impl std::str::FromStr for ExportFormat {
    type Err = ArgError;

    fn from_str(s: &str) -> Result<ExportFormat, ArgError> {
        match s {
            "text" => Ok(ExportFormat::Text),
            "dot" | "graph" => Ok(ExportFormat::Dot),
            "structured" | "json" => Ok(ExportFormat::Structured),
            other => Err(ArgError::UnknownFormat(other.to_string())),
        }
    }
}

fn mark_suffix(mark: Option<Mark>) -> &'static str {
    match mark {
        Some(Mark::U) => "[U]",
        Some(Mark::D) => "[D]",
        None => "[?]",
    }
}

/// Serialize a marked tree as an indented outline, a DOT digraph, or
/// structured JSON that round-trips through [`tree_from_structured`].
pub fn export_tree(tree: &ArgumentTree, format: ExportFormat) -> Result<String, ArgError> {
    match format {
        ExportFormat::Text => {
            let mut out = String::new();
            let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
            while let Some((i, depth)) = stack.pop() {
                let node = &tree.nodes[i];
                let attack = node.attack.map(|k| format!(" ({k})")).unwrap_or_default();
                out.push_str(&format!(
                    "{}{}{attack} {}\n",
                    "  ".repeat(depth),
                    node.argument.id,
                    mark_suffix(node.mark)
                ));
                for &c in node.children.iter().rev() {
                    stack.push((c, depth + 1));
                }
            }
            Ok(out)
        }
        ExportFormat::Dot => {
            let mut out = String::from("digraph argument_tree {\n");
            for (i, node) in tree.nodes.iter().enumerate() {
                out.push_str(&format!(
                    "  n{i} [label=\"{} {}\"];\n",
                    node.argument.id,
                    mark_suffix(node.mark)
                ));
            }
            for edge in tree.edges() {
                out.push_str(&format!(
                    "  n{} -> n{} [label=\"{}\"];\n",
                    edge.attacker, edge.target, edge.kind
                ));
            }
            out.push_str("}\n");
            Ok(out)
        }
        ExportFormat::Structured => {
            Ok(serde_json::to_string_pretty(tree).expect("tree serializes"))
        }
    }
}

/// Rebuild a tree from its structured export.
pub fn tree_from_structured(text: &str) -> Result<ArgumentTree, ArgError> {
    let tree: ArgumentTree =
        serde_json::from_str(text).map_err(|e| ArgError::Malformed(e.to_string()))?;
    if tree.nodes.is_empty() {
        return Err(ArgError::Malformed("tree has no nodes".into()));
    }
    for (i, node) in tree.nodes.iter().enumerate() {
        if let Some(p) = node.parent {
            if p >= tree.nodes.len() || !tree.nodes[p].children.contains(&i) {
                return Err(ArgError::Malformed(format!(
                    "node {i} has a dangling parent"
                )));
            }
        }
        for &c in &node.children {
            if c >= tree.nodes.len() || tree.nodes[c].parent != Some(i) {
                return Err(ArgError::Malformed(format!(
                    "node {i} has a dangling child"
                )));
            }
        }
    }
    Ok(tree)
}
