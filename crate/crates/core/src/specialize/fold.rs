use std::collections::BTreeMap;

use crate::constraint::Constraint;
use crate::generalize::generalize;
use crate::model::Ctl;
use crate::wqo::fires;

use super::{BodyLiteral, DefId, Definition, Literal, Origin, PClause, Pred, SpecClause, SpecializeError, Specializer};

impl Specializer<'_> {
    /// Replaces every `sat`/`¬sat` literal by a call to a definition, reusing,
    /// generalizing or introducing definitions as needed. Returns the ids of
    /// the new definitions and the folded clauses.
    pub fn generalize_and_fold(
        &mut self,
        gamma: Option<DefId>,
        clauses: Vec<SpecClause>,
    ) -> Result<(Vec<DefId>, Vec<PClause>), SpecializeError> {
        let first_new = self.defs.len();
        let mut out = Vec::new();
        for mut clause in clauses {
            for i in 0..clause.body.len() {
                let (block, formula, negated) = match &clause.body[i] {
                    BodyLiteral::Sat(b, f) => (*b, f.clone(), false),
                    BodyLiteral::NegSat(b, f) => (*b, f.clone(), true),
                    _ => continue,
                };
                let e_p = self
                    .spec
                    .schema
                    .rebase(&clause.constraint.project(&self.spec.schema.block_vars(block)), |_| 0)
                    .remove_redundant();
                let id = self.fold_target(gamma, formula, e_p)?;
                clause.body[i] = if negated {
                    BodyLiteral::NegDef(id, block)
                } else {
                    BodyLiteral::Def(id, block)
                };
            }
            out.push(self.finish_clause(clause));
        }
        let new_ids = self.defs[first_new..].iter().map(|d| d.id).collect();
        Ok((new_ids, out))
    }

    /// Step 1 (reuse), Step 2 (generalize against an ancestor) or Step 3
    /// (fresh definition).
    fn fold_target(&mut self, gamma: Option<DefId>, formula: Ctl, e_p: Constraint) -> Result<DefId, SpecializeError> {
        if let Some(d) = self
            .defs
            .iter()
            .rev()
            .find(|d| d.formula == formula && e_p.entails(&d.constraint))
        {
            self.stats.reuse += 1;
            return Ok(d.id);
        }
        let mut cursor = if self.config.ancestor_includes_self {
            gamma
        } else {
            gamma.and_then(|g| self.definition(g).parent)
        };
        while let Some(a) = cursor {
            let anc = self.definition(a);
            if anc.formula == formula && fires(self.config.firing, &anc.constraint, &e_p) {
                let g = generalize(self.config.genop, &anc.constraint, &e_p)
                    .expect("operands of generalization are satisfiable");
                self.stats.generalize += 1;
                return Ok(self.introduce(g, formula, gamma, Origin::Generalized { ancestor: a, projection: e_p }));
            }
            cursor = anc.parent;
        }
        self.stats.fresh += 1;
        Ok(self.introduce(e_p, formula, gamma, Origin::Projection))
    }

    fn introduce(&mut self, constraint: Constraint, formula: Ctl, parent: Option<DefId>, origin: Origin) -> DefId {
        let id = self.defs.len() as DefId + 1;
        self.defs.push(Definition { id, constraint, formula, parent, origin });
        id
    }

    /// Projects away blocks that no longer occur and renumbers the rest by
    /// first appearance (head first).
    fn finish_clause(&self, clause: SpecClause) -> PClause {
        let mut order: BTreeMap<u32, u32> = BTreeMap::new();
        let mut next = 0u32;
        let mut visit = |b: u32, order: &mut BTreeMap<u32, u32>| {
            if let std::collections::btree_map::Entry::Vacant(e) = order.entry(b) {
                e.insert(next);
                next += 1;
            }
        };
        if matches!(clause.head, Pred::Def(_)) {
            visit(0, &mut order);
        }
        let mut body = Vec::new();
        for l in &clause.body {
            let (pred, negated, block) = match l {
                BodyLiteral::Def(id, b) => (Pred::Def(*id), false, *b),
                BodyLiteral::NegDef(id, b) => (Pred::Def(*id), true, *b),
                other => panic!("unfolded clause still contains {other:?}"),
            };
            visit(block, &mut order);
            body.push((pred, negated, block));
        }
        let schema = &self.spec.schema;
        let keep: Vec<_> = order.keys().flat_map(|&b| schema.block_vars(b)).collect();
        let projected = clause.constraint.project(&keep);
        let constraint = schema.rebase(&projected, |b| order[&b]).remove_redundant();
        PClause {
            head: clause.head,
            constraint,
            body: body
                .into_iter()
                .map(|(pred, negated, b)| Literal { pred, negated, block: order[&b] })
                .collect(),
        }
    }
}
