//! Seeded random organization models for property tests and benchmarks.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::agents::{AtomicAgent, GeneralAgentType};
use crate::error::Result;
use crate::ontology::{
    AgentTypeDoc, ConceptDoc, ConceptKind, FunctionalityDoc, Gender, InterfaceSpec, ModelDocument, ResourceModel,
};
use crate::policies::TRANSPORT_PROVIDER;

#[derive(Debug, Clone, Copy)]
pub struct SynthParams {
    pub resources: usize,
    pub functionalities: usize,
    pub agent_types: usize,
    /// Whether the optional subconcept carries its own survival probability
    /// instead of inheriting it.
    pub subconcept_p: bool,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            resources: 4,
            functionalities: 4,
            agent_types: 3,
            subconcept_p: true,
        }
    }
}

/// Random but valid model document. Resources are `R<i>` (with an optional
/// subconcept `R0Sub`), functionalities `F<i>` plus `TransportProvider`,
/// agent types `T<i>`, and one interface concept `Link`.
pub fn random_document<R: Rng>(rng: &mut R, params: &SynthParams) -> ModelDocument {
    let mut doc = ModelDocument::default();
    let nres = params.resources.max(1);
    let mut resources: Vec<String> = Vec::new();
    for i in 0..nres {
        let id = format!("R{i}");
        let p = f64::from(rng.gen_range(50..=100u32)) / 100.0;
        doc.concepts.insert(
            id.clone(),
            ConceptDoc {
                parent: None,
                kind: Some(ConceptKind::Resource),
                p_survival: Some(p),
            },
        );
        resources.push(id);
    }
    if rng.gen_bool(0.5) {
        doc.concepts.insert(
            "R0Sub".into(),
            ConceptDoc {
                parent: Some("R0".into()),
                kind: None,
                p_survival: params
                    .subconcept_p
                    .then(|| f64::from(rng.gen_range(50..=100u32)) / 100.0),
            },
        );
        resources.push("R0Sub".into());
    }
    doc.concepts.insert(
        "Link".into(),
        ConceptDoc {
            parent: None,
            kind: Some(ConceptKind::Interface),
            p_survival: None,
        },
    );

    let mut funcs: Vec<String> = Vec::new();
    for i in 0..params.functionalities {
        let mut requires = BTreeMap::new();
        let k = rng.gen_range(1..=2.min(nres));
        for r in resources[..nres].choose_multiple(rng, k) {
            requires.insert(r.clone(), rng.gen_range(1..=2));
        }
        if !funcs.is_empty() && rng.gen_bool(0.3) {
            let dep = funcs.choose(rng).expect("non-empty").clone();
            requires.insert(dep, 1);
        }
        let id = format!("F{i}");
        doc.functionalities
            .insert(id.clone(), FunctionalityDoc { parent: None, requires });
        funcs.push(id);
    }
    doc.functionalities.insert(
        TRANSPORT_PROVIDER.into(),
        FunctionalityDoc {
            parent: None,
            requires: BTreeMap::from([("R0".to_string(), 1)]),
        },
    );

    for i in 0..params.agent_types.max(1) {
        let mut resources_of = BTreeMap::new();
        for r in &resources {
            let c = rng.gen_range(0..=2u32);
            if c > 0 {
                resources_of.insert(r.clone(), c);
            }
        }
        let mut interfaces = Vec::new();
        for gender in [Gender::Male, Gender::Female] {
            let count = rng.gen_range(0..=3u32);
            if count > 0 {
                interfaces.push(InterfaceSpec {
                    interface: "Link".into(),
                    gender,
                    count,
                });
            }
        }
        let mut properties = BTreeMap::new();
        properties.insert("pw".to_string(), f64::from(rng.gen_range(0..=200u32)));
        properties.insert("tcap".to_string(), f64::from(rng.gen_range(0..=10u32)));
        properties.insert("tcon".to_string(), 1.0);
        properties.insert("v_nom".to_string(), f64::from(rng.gen_range(0..=3u32)) / 2.0);
        doc.agent_types.insert(
            format!("T{i}"),
            AgentTypeDoc {
                parent: None,
                resources: resources_of,
                interfaces,
                properties,
            },
        );
    }
    doc
}

pub fn random_model<R: Rng>(rng: &mut R, params: &SynthParams) -> Result<ResourceModel> {
    ResourceModel::from_document(random_document(rng, params))
}

/// Random general agent type over the model's atomic types with between 0
/// and `max_total` atoms.
pub fn random_type<R: Rng>(rng: &mut R, model: &ResourceModel, max_total: u32) -> GeneralAgentType {
    let types: Vec<&str> = model.agent_types().map(|d| d.id.as_str()).collect();
    let total = rng.gen_range(0..=max_total);
    let mut t = GeneralAgentType::new();
    for _ in 0..total {
        t.add(*types.choose(rng).expect("model has agent types"), 1);
    }
    t
}

/// Atom pool of `n` agents with ids `a0..`, types drawn from the model.
pub fn random_pool<R: Rng>(rng: &mut R, model: &ResourceModel, n: usize) -> BTreeSet<AtomicAgent> {
    let types: Vec<&str> = model.agent_types().map(|d| d.id.as_str()).collect();
    (0..n)
        .map(|i| AtomicAgent::new(format!("a{i}"), *types.choose(rng).expect("model has agent types")))
        .collect()
}

/// Functionality names of the model, sorted.
pub fn functionality_names(model: &ResourceModel) -> Vec<String> {
    model.functionalities().map(str::to_string).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_models_load() {
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_model(&mut rng, &SynthParams::default()).unwrap();
            assert!(m.policy(TRANSPORT_PROVIDER).is_some());
            let t = random_type(&mut rng, &m, 5);
            assert!(t.total() <= 5);
        }
    }

    #[test]
    fn documents_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let doc = random_document(&mut rng, &SynthParams::default());
        let text = doc.to_yaml().unwrap();
        assert_eq!(ModelDocument::from_yaml(&text).unwrap(), doc);
    }
}
