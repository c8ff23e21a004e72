use serde::ser::SerializeStruct;
use serde::Serialize;

use super::word::{Alphabet, Word};
use crate::error::ModelError;

/// One operand of an assembly step: a free letter or the product of an
/// earlier step (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Operand {
    Terminal(char),
    Prior(usize),
}

/// `X_i := left ∘ right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct AssemblyStep {
    pub left: Operand,
    pub right: Operand,
}

impl AssemblyStep {
    pub fn new(left: Operand, right: Operand) -> Self {
        Self { left, right }
    }

    pub fn operands(&self) -> [Operand; 2] {
        [self.left, self.right]
    }
}

/// An ordered list of binary concatenation steps. The last step's product is
/// the plan's product; its cost is the number of steps.
///
/// A step may use the same earlier product twice, and intermediates may
/// repeat. Structural checks happen in [`AssemblyPlan::validate`] and in the
/// verifier, not at construction, so malformed witnesses can be represented
/// and rejected with a precise error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssemblyPlan {
    pub alphabet: Alphabet,
    pub steps: Vec<AssemblyStep>,
    pub declared_target: Option<Word>,
}

impl AssemblyPlan {
    pub fn new(alphabet: Alphabet, steps: Vec<AssemblyStep>) -> Self {
        Self {
            alphabet,
            steps,
            declared_target: None,
        }
    }

    pub fn with_target(mut self, target: Word) -> Self {
        self.declared_target = Some(target);
        self
    }

    pub fn cost(&self) -> usize {
        self.steps.len()
    }

    /// Checks that every terminal is in the alphabet and every prior
    /// reference points to a strictly earlier step.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (i, step) in self.steps.iter().enumerate() {
            let index = i + 1;
            for op in step.operands() {
                match op {
                    Operand::Terminal(c) if !self.alphabet.contains(c) => {
                        return Err(ModelError::SymbolNotInAlphabet(c));
                    }
                    Operand::Prior(j) if j == 0 || j >= index => {
                        return Err(ModelError::DanglingReference {
                            step: index,
                            reference: j,
                        });
                    }
                    _ => {}
                }
            }
        }
        if let Some(target) = &self.declared_target {
            if let Some(&c) = target.symbols().iter().find(|&&c| !self.alphabet.contains(c)) {
                return Err(ModelError::SymbolNotInAlphabet(c));
            }
        }
        Ok(())
    }

    /// Lengths of every intermediate product, saturating at `u128::MAX`.
    /// Assumes a validated plan.
    pub(crate) fn product_lengths(&self) -> Vec<u128> {
        let mut lengths: Vec<u128> = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            let len = step
                .operands()
                .iter()
                .map(|op| match *op {
                    Operand::Terminal(_) => 1,
                    Operand::Prior(j) => lengths[j - 1],
                })
                .fold(0u128, u128::saturating_add);
            lengths.push(len);
        }
        lengths
    }

    /// Reconstructs the final product. Fails on an empty plan, on malformed
    /// references, or when the product would exceed `max_len`.
    pub fn product(&self, max_len: usize) -> Result<Word, ModelError> {
        self.validate()?;
        let Some(&final_len) = self.product_lengths().last() else {
            return Err(ModelError::EmptyPlan);
        };
        if final_len > max_len as u128 {
            return Err(ModelError::ExpansionTooLarge {
                length: final_len,
                max_len,
            });
        }
        // Intermediates that feed the final product are no longer than it,
        // but unused ones may be; only materialize what is reachable.
        let t = self.steps.len();
        let mut needed = vec![false; t];
        needed[t - 1] = true;
        for i in (0..t).rev() {
            if needed[i] {
                for op in self.steps[i].operands() {
                    if let Operand::Prior(j) = op {
                        needed[j - 1] = true;
                    }
                }
            }
        }
        let mut built: Vec<Vec<char>> = vec![Vec::new(); t];
        for i in 0..t {
            if !needed[i] {
                continue;
            }
            let mut s = Vec::new();
            for op in self.steps[i].operands() {
                match op {
                    Operand::Terminal(c) => s.push(c),
                    Operand::Prior(j) => s.extend_from_slice(&built[j - 1]),
                }
            }
            built[i] = s;
        }
        Word::new(built.pop().expect("non-empty plan"))
    }
}

/// Number of assembly steps.
pub fn plan_cost(plan: &AssemblyPlan) -> usize {
    plan.cost()
}

impl Serialize for AssemblyPlan {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("AssemblyPlan", 4)?;
        s.serialize_field("alphabet", &self.alphabet)?;
        s.serialize_field("target", &self.declared_target)?;
        s.serialize_field("steps", &self.steps)?;
        s.serialize_field("cost", &self.cost())?;
        s.end()
    }
}

/// Why a well-formed plan was not accepted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Rejection {
    /// The final product differs from the target.
    Mismatch,
    /// The product matches but the plan uses more than `k` steps.
    OverBudget { k: usize },
    /// An intermediate is longer than the target; verification stopped
    /// before materializing it.
    Oversized { step: usize, length: u128 },
}

/// Outcome of [`verify_plan`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub accepted: bool,
    /// The reconstructed final product, absent when verification aborted on
    /// an oversized intermediate.
    pub produced: Option<Word>,
    pub steps_used: usize,
    pub rejection: Option<Rejection>,
    /// Symbols copied while rebuilding intermediates.
    pub symbol_copies: u64,
}

/// Rebuilds every intermediate in step order and accepts iff the final
/// product equals `target` and the plan has at most `k` steps.
///
/// Every materialized intermediate is at most `|target|` long, so the work is
/// bounded by `t * |target|` symbol copies.
pub fn verify_plan(plan: &AssemblyPlan, target: &Word, k: usize) -> Result<Verdict, ModelError> {
    plan.validate()?;
    if let Some(&c) = target.symbols().iter().find(|&&c| !plan.alphabet.contains(c)) {
        return Err(ModelError::SymbolNotInAlphabet(c));
    }
    let t = plan.steps.len();
    let n = target.len();
    if t == 0 {
        if n > 1 {
            return Err(ModelError::EmptyPlanNonEmptyTarget(n));
        }
        return Ok(Verdict {
            accepted: true,
            produced: Some(target.clone()),
            steps_used: 0,
            rejection: None,
            symbol_copies: 0,
        });
    }

    let mut built: Vec<Vec<char>> = Vec::with_capacity(t);
    let mut copies = 0u64;
    for (i, step) in plan.steps.iter().enumerate() {
        let length: usize = step
            .operands()
            .iter()
            .map(|op| match *op {
                Operand::Terminal(_) => 1,
                Operand::Prior(j) => built[j - 1].len(),
            })
            .sum();
        if length > n {
            return Ok(Verdict {
                accepted: false,
                produced: None,
                steps_used: t,
                rejection: Some(Rejection::Oversized {
                    step: i + 1,
                    length: length as u128,
                }),
                symbol_copies: copies,
            });
        }
        let mut s = Vec::with_capacity(length);
        for op in step.operands() {
            match op {
                Operand::Terminal(c) => s.push(c),
                Operand::Prior(j) => s.extend_from_slice(&built[j - 1]),
            }
        }
        copies += length as u64;
        built.push(s);
    }

    let product = built.pop().expect("t > 0");
    let rejection = if product != target.symbols() {
        Some(Rejection::Mismatch)
    } else if t > k {
        Some(Rejection::OverBudget { k })
    } else {
        None
    };
    Ok(Verdict {
        accepted: rejection.is_none(),
        produced: Some(Word::new(product)?),
        steps_used: t,
        rejection,
        symbol_copies: copies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Operand::{Prior, Terminal};

    fn binary() -> Alphabet {
        Alphabet::new(['0', '1']).unwrap()
    }

    /// s1 = 01, s2 = 010, s3 = s1 s2 = 01010.
    fn plan_01010() -> AssemblyPlan {
        AssemblyPlan::new(
            binary(),
            vec![
                AssemblyStep::new(Terminal('0'), Terminal('1')),
                AssemblyStep::new(Prior(1), Terminal('0')),
                AssemblyStep::new(Prior(1), Prior(2)),
            ],
        )
    }

    #[test]
    fn costs() {
        assert_eq!(plan_cost(&plan_01010()), 3);
        assert_eq!(plan_cost(&AssemblyPlan::new(binary(), vec![])), 0);
        let doubling = AssemblyPlan::new(
            binary(),
            vec![
                AssemblyStep::new(Terminal('0'), Terminal('0')),
                AssemblyStep::new(Prior(1), Prior(1)),
            ],
        );
        assert_eq!(plan_cost(&doubling), 2);
    }

    #[test]
    fn plan_01010_verifies_at_three_not_two() {
        let w = Word::parse("01010").unwrap();
        let v = verify_plan(&plan_01010(), &w, 3).unwrap();
        assert!(v.accepted);
        assert_eq!(v.produced.as_ref(), Some(&w));
        assert_eq!(v.steps_used, 3);

        let v = verify_plan(&plan_01010(), &w, 2).unwrap();
        assert!(!v.accepted);
        assert_eq!(v.rejection, Some(Rejection::OverBudget { k: 2 }));
    }

    #[test]
    fn operand_order_matters() {
        // s3 = s2 s1 = 010 01 builds 01001, not 01010.
        let mut plan = plan_01010();
        plan.steps[2] = AssemblyStep::new(Prior(2), Prior(1));
        let v = verify_plan(&plan, &Word::parse("01010").unwrap(), 3).unwrap();
        assert!(!v.accepted);
        assert_eq!(v.rejection, Some(Rejection::Mismatch));
        assert_eq!(v.produced.unwrap().to_string(), "01001");
        assert!(verify_plan(&plan, &Word::parse("01001").unwrap(), 3).unwrap().accepted);
    }

    #[test]
    fn mismatch_reports_product() {
        let plan = AssemblyPlan::new(binary(), vec![AssemblyStep::new(Terminal('0'), Terminal('1'))]);
        let v = verify_plan(&plan, &Word::parse("10").unwrap(), 1).unwrap();
        assert!(!v.accepted);
        assert_eq!(v.produced.unwrap().to_string(), "01");
        assert_eq!(v.rejection, Some(Rejection::Mismatch));
    }

    #[test]
    fn forward_reference_is_an_error() {
        let plan = AssemblyPlan::new(binary(), vec![AssemblyStep::new(Prior(2), Terminal('0'))]);
        let err = verify_plan(&plan, &Word::parse("00").unwrap(), 5).unwrap_err();
        assert_eq!(err, ModelError::DanglingReference { step: 1, reference: 2 });
        let self_ref = AssemblyPlan::new(binary(), vec![AssemblyStep::new(Prior(1), Terminal('0'))]);
        assert!(matches!(
            verify_plan(&self_ref, &Word::parse("00").unwrap(), 5),
            Err(ModelError::DanglingReference { .. })
        ));
    }

    #[test]
    fn empty_plan_cases() {
        let empty = AssemblyPlan::new(binary(), vec![]);
        assert_eq!(
            verify_plan(&empty, &Word::parse("01").unwrap(), 3),
            Err(ModelError::EmptyPlanNonEmptyTarget(2))
        );
        let v = verify_plan(&empty, &Word::parse("1").unwrap(), 0).unwrap();
        assert!(v.accepted);
    }

    #[test]
    fn foreign_symbols_are_errors() {
        let plan = AssemblyPlan::new(binary(), vec![AssemblyStep::new(Terminal('x'), Terminal('1'))]);
        assert_eq!(
            verify_plan(&plan, &Word::parse("x1").unwrap(), 1),
            Err(ModelError::SymbolNotInAlphabet('x'))
        );
    }

    #[test]
    fn oversized_intermediate_rejects_without_building() {
        let plan = AssemblyPlan::new(
            binary(),
            vec![
                AssemblyStep::new(Terminal('0'), Terminal('0')),
                AssemblyStep::new(Prior(1), Prior(1)),
                AssemblyStep::new(Terminal('0'), Terminal('1')),
            ],
        );
        let v = verify_plan(&plan, &Word::parse("011").unwrap(), 3).unwrap();
        assert!(!v.accepted);
        assert_eq!(v.rejection, Some(Rejection::Oversized { step: 2, length: 4 }));
        assert_eq!(v.produced, None);
        assert_eq!(v.symbol_copies, 2);
    }

    #[test]
    fn product_skips_unused_blowup() {
        let mut steps = vec![AssemblyStep::new(Terminal('0'), Terminal('0'))];
        for j in 1..60 {
            steps.push(AssemblyStep::new(Prior(j), Prior(j)));
        }
        steps.push(AssemblyStep::new(Terminal('0'), Terminal('1')));
        let plan = AssemblyPlan::new(binary(), steps);
        assert_eq!(plan.product(16).unwrap().to_string(), "01");
    }

    #[test]
    fn json_field_names() {
        let json = serde_json::to_value(plan_01010()).unwrap();
        assert_eq!(json["cost"], 3);
        assert_eq!(json["alphabet"], serde_json::json!(["0", "1"]));
        assert_eq!(json["steps"][1]["left"], serde_json::json!({"prior": 1}));
        assert_eq!(json["steps"][1]["right"], serde_json::json!({"terminal": "0"}));
    }
}
