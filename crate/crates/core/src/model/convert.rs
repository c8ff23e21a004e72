//! Step-for-rule correspondence between assembly plans and straight-line
//! programs. Both directions preserve cost exactly.

use std::collections::HashMap;

use super::plan::{AssemblyPlan, AssemblyStep, Operand};
use super::slp::{Ref, ResolvedRhs, Slp, SlpRule, SlpSymbol};
use super::word::Word;
use crate::error::ModelError;

fn rule_name(step: usize) -> String {
    format!("R{step}")
}

/// Step `s_i = U ∘ V` becomes rule `R_i -> U V`; the final step's rule is the
/// start symbol.
pub fn plan_to_slp(plan: &AssemblyPlan) -> Result<Slp, ModelError> {
    plan.validate()?;
    if plan.steps.is_empty() {
        return Err(ModelError::EmptyPlan);
    }
    let symbol = |op: Operand| match op {
        Operand::Terminal(c) => SlpSymbol::Terminal(c),
        Operand::Prior(j) => SlpSymbol::Nonterminal(rule_name(j)),
    };
    let rules = plan
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| SlpRule::pair(rule_name(i + 1), symbol(s.left), symbol(s.right)))
        .collect();
    Slp::new(plan.alphabet.clone(), rules, rule_name(plan.steps.len()))
}

/// Emits one step per concatenation rule in a stable topological order
/// (earliest-listed ready rule first, start rule last). Terminal aliases are
/// inlined. When the start rule is itself an alias the result is the empty
/// plan, with the aliased letter recorded as its declared target.
pub fn slp_to_plan(slp: &Slp) -> Result<AssemblyPlan, ModelError> {
    let resolved = slp.resolve()?;
    if let ResolvedRhs::Terminal(c) = resolved.rhs[resolved.start] {
        let target = Word::new(vec![c])?;
        return Ok(AssemblyPlan::new(slp.alphabet().clone(), Vec::new()).with_target(target));
    }
    let mut step_of: HashMap<usize, usize> = HashMap::new();
    let mut steps = Vec::with_capacity(slp.size());
    for &i in &resolved.order {
        if let ResolvedRhs::Pair(a, b) = resolved.rhs[i] {
            let operand = |r: Ref| match r {
                Ref::Terminal(c) => Operand::Terminal(c),
                Ref::Rule(j) => Operand::Prior(step_of[&j]),
            };
            steps.push(AssemblyStep::new(operand(a), operand(b)));
            step_of.insert(i, steps.len());
        }
    }
    Ok(AssemblyPlan::new(slp.alphabet().clone(), steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::slp::{expand_slp, slp_size, DEFAULT_MAX_EXPANSION};
    use crate::model::word::Alphabet;
    use crate::model::plan::verify_plan;
    use proptest::prelude::*;
    use Operand::{Prior, Terminal};

    fn plan_01010() -> AssemblyPlan {
        AssemblyPlan::new(
            Alphabet::new(['0', '1']).unwrap(),
            vec![
                AssemblyStep::new(Terminal('0'), Terminal('1')),
                AssemblyStep::new(Prior(1), Terminal('0')),
                AssemblyStep::new(Prior(1), Prior(2)),
            ],
        )
    }

    #[test]
    fn plan_01010_maps_rule_for_step() {
        let g = plan_to_slp(&plan_01010()).unwrap();
        assert_eq!(g.start(), "R3");
        assert_eq!(
            g.rules(),
            &[
                SlpRule::pair("R1", SlpSymbol::Terminal('0'), SlpSymbol::Terminal('1')),
                SlpRule::pair("R2", SlpSymbol::nt("R1"), SlpSymbol::Terminal('0')),
                SlpRule::pair("R3", SlpSymbol::nt("R1"), SlpSymbol::nt("R2")),
            ]
        );
        assert_eq!(slp_size(&g), 3);
        assert_eq!(slp_to_plan(&g).unwrap(), plan_01010());
    }

    #[test]
    fn single_step() {
        let plan = AssemblyPlan::new(
            Alphabet::new(['a']).unwrap(),
            vec![AssemblyStep::new(Terminal('a'), Terminal('a'))],
        );
        let g = plan_to_slp(&plan).unwrap();
        assert_eq!(g.rules(), &[SlpRule::pair("R1", SlpSymbol::Terminal('a'), SlpSymbol::Terminal('a'))]);
        let back = Slp::new(
            Alphabet::new(['a', 'b']).unwrap(),
            vec![SlpRule::pair("R1", SlpSymbol::Terminal('a'), SlpSymbol::Terminal('b'))],
            "R1",
        )
        .unwrap();
        assert_eq!(
            slp_to_plan(&back).unwrap().steps,
            vec![AssemblyStep::new(Terminal('a'), Terminal('b'))]
        );
    }

    #[test]
    fn empty_plan_has_no_grammar() {
        let plan = AssemblyPlan::new(Alphabet::new(['a']).unwrap(), vec![]);
        assert_eq!(plan_to_slp(&plan), Err(ModelError::EmptyPlan));
    }

    #[test]
    fn alias_grammar_becomes_empty_plan() {
        let g = Slp::new(Alphabet::new(['x']).unwrap(), vec![SlpRule::alias("S", 'x')], "S").unwrap();
        let plan = slp_to_plan(&g).unwrap();
        assert_eq!(plan.cost(), 0);
        assert_eq!(plan.declared_target.unwrap().to_string(), "x");
    }

    #[test]
    fn reverse_listed_rules_normalize() {
        let g = Slp::new(
            Alphabet::new(['0', '1']).unwrap(),
            vec![
                SlpRule::pair("R3", SlpSymbol::nt("R1"), SlpSymbol::nt("R2")),
                SlpRule::pair("R2", SlpSymbol::nt("R1"), SlpSymbol::Terminal('0')),
                SlpRule::pair("R1", SlpSymbol::Terminal('0'), SlpSymbol::Terminal('1')),
            ],
            "R3",
        )
        .unwrap();
        assert_eq!(slp_to_plan(&g).unwrap(), plan_01010());
    }

    #[test]
    fn start_referenced_is_rejected() {
        let g = Slp::new(
            Alphabet::new(['0']).unwrap(),
            vec![
                SlpRule::pair("S", SlpSymbol::Terminal('0'), SlpSymbol::Terminal('0')),
                SlpRule::pair("X", SlpSymbol::nt("S"), SlpSymbol::nt("S")),
            ],
            "S",
        )
        .unwrap();
        assert_eq!(slp_to_plan(&g), Err(ModelError::StartReferenced("S".into())));
    }

    /// Random valid plans; steps need not feed the final product.
    fn arb_plan() -> impl Strategy<Value = AssemblyPlan> {
        (1usize..=4, 1usize..=50)
            .prop_flat_map(|(sigma, t)| {
                let ops: Vec<_> = (0..t)
                    .map(|i| {
                        let op = prop_oneof![
                            (0..sigma).prop_map(|a| Terminal((b'a' + a as u8) as char)),
                            (0..i.max(1)).prop_map(move |j| if i == 0 {
                                Terminal('a')
                            } else {
                                Prior(j + 1)
                            }),
                        ];
                        (op.clone(), op)
                    })
                    .collect();
                (Just(sigma), ops)
            })
            .prop_map(|(sigma, ops)| {
                let alphabet = Alphabet::new((0..sigma).map(|a| (b'a' + a as u8) as char)).unwrap();
                let steps = ops.into_iter().map(|(l, r)| AssemblyStep::new(l, r)).collect();
                AssemblyPlan::new(alphabet, steps)
            })
    }

    proptest! {
        #[test]
        fn size_and_semantics_survive_roundtrip(plan in arb_plan()) {
            let g = plan_to_slp(&plan).unwrap();
            prop_assert_eq!(slp_size(&g), plan.cost());
            let back = slp_to_plan(&g).unwrap();
            prop_assert_eq!(back.cost(), plan.cost());
            prop_assert_eq!(&back, &plan);
            match plan.product(DEFAULT_MAX_EXPANSION) {
                Ok(w) => {
                    prop_assert_eq!(&expand_slp(&g, DEFAULT_MAX_EXPANSION).unwrap(), &w);
                    let v = verify_plan(&back, &w, slp_size(&g)).unwrap();
                    let oversized = matches!(v.rejection, Some(crate::Rejection::Oversized { .. }));
                    prop_assert!(v.accepted || oversized);
                }
                Err(ModelError::ExpansionTooLarge { .. }) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
