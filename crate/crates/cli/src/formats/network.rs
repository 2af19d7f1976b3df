//! Standalone network documents: unit values, value set, 1-based incoming
//! links and the unit parameters.

use metamodel_core::ann::NeuralNetwork;
use serde::{Deserialize, Serialize};

use super::model::{to_zero_based, NeuralDoc, StatesDoc};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub units: Vec<f64>,
    pub value_set: StatesDoc,
    pub incoming: Vec<Vec<usize>>,
    #[serde(flatten)]
    pub update: NeuralDoc,
}

impl NetworkFile {
    pub fn of(net: &NeuralNetwork) -> Self {
        NetworkFile {
            units: net.units().to_vec(),
            value_set: StatesDoc::of(net.value_set()),
            incoming: net
                .incoming()
                .iter()
                .map(|links| links.iter().map(|j| j + 1).collect())
                .collect(),
            update: NeuralDoc::of(net.update()),
        }
    }

    pub fn to_network(&self) -> Result<NeuralNetwork> {
        let incoming = self
            .incoming
            .iter()
            .map(|links| to_zero_based(links, "incoming"))
            .collect::<Result<_>>()?;
        Ok(NeuralNetwork::new(
            self.units.clone(),
            self.value_set.to_state_set()?,
            incoming,
            self.update.to_update()?,
        )?)
    }
}

pub fn write_network(net: &NeuralNetwork) -> String {
    let mut text = serde_json::to_string_pretty(&NetworkFile::of(net)).expect("network serializes");
    text.push('\n');
    text
}

pub fn read_network(text: &str) -> Result<NeuralNetwork> {
    serde_json::from_str::<NetworkFile>(text)?.to_network()
}
