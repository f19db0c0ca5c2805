// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Element, KripkeModel, ModelError};

/// On-disk model format:
/// `{"domains": [[e,...],...], "extensions": {"P": [[state, [e,...]],...]}, "order": [[i,j],...], "states": N}`.
///
/// Fields are declared in key order so the serializer emits sorted keys;
/// tuples, pairs and domains are sorted as well.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub domains: Vec<Vec<Element>>,
    #[serde(default)]
    pub extensions: BTreeMap<String, Vec<(usize, Vec<Element>)>>,
    pub order: Vec<(usize, usize)>,
    pub states: usize,
}

impl ModelFile {
    pub fn from_model(m: &KripkeModel) -> Self {
        ModelFile {
            domains: m
                .domains()
                .iter()
                .map(|d| d.iter().copied().collect())
                .collect(),
            extensions: m
                .extensions()
                .iter()
                .map(|(p, per_state)| {
                    let rows = per_state
                        .iter()
                        .enumerate()
                        .flat_map(|(c, tuples)| tuples.iter().map(move |t| (c, t.clone())))
                        .collect();
                    (p.clone(), rows)
                })
                .collect(),
            order: m.order().iter().copied().collect(),
            states: m.num_states(),
        }
    }

    /// Builds the model and runs the validator on it.
    pub fn into_model(self) -> Result<KripkeModel, ModelError> {
        let m = self.to_model_unchecked();
        let violations = m.validate();
        if violations.is_empty() {
            Ok(m)
        } else {
            let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            Err(ModelError::Invalid(msgs.join("; ")))
        }
    }

    pub fn to_model_unchecked(&self) -> KripkeModel {
        let mut ext: BTreeMap<String, Vec<BTreeSet<Vec<Element>>>> = BTreeMap::new();
        for (p, rows) in &self.extensions {
            let per = ext
                .entry(p.clone())
                .or_insert_with(|| vec![BTreeSet::new(); self.states]);
            for (c, t) in rows {
                if *c >= per.len() {
                    per.resize(*c + 1, BTreeSet::new());
                }
                per[*c].insert(t.clone());
            }
        }
        KripkeModel::new(
            self.states,
            self.order.iter().copied().collect(),
            self.domains
                .iter()
                .map(|d| d.iter().copied().collect())
                .collect(),
            ext,
        )
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("model file serializes")
    }

    pub fn parse(text: &str) -> Result<KripkeModel, ModelError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| ModelError::Invalid(e.to_string()))?;
        file.into_model()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::tests::lem_countermodel;

    #[test]
    fn canonical_serialization_golden() {
        let text = ModelFile::from_model(&lem_countermodel()).to_canonical_json();
        assert_eq!(
            text,
            r#"{"domains":[[0],[0]],"extensions":{"P":[[1,[0]]]},"order":[[0,0],[0,1],[1,1]],"states":2}"#
        );
        assert_eq!(ModelFile::parse(&text).unwrap(), lem_countermodel());
    }

    #[test]
    fn loading_runs_the_validator() {
        let bad = r#"{"states":2,"order":[[0,0],[1,1],[0,1]],"domains":[[0],[]],"extensions":{}}"#;
        let err = ModelFile::parse(bad).unwrap_err();
        assert!(err.to_string().contains("domain not monotone"));
    }
}
