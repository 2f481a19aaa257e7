//! Shared unit-test fixtures.

use reorg_core::{load_model, ResourceModel};

pub(crate) const SPACE_MODEL: &str = include_str!("../../../data/space_model.yaml");
pub(crate) const DESK_MISSION: &str = include_str!("../../../data/desk_mission.yaml");
pub(crate) const SPACE_MISSION: &str = include_str!("../../../data/space_mission.yaml");

pub(crate) fn desk_model() -> ResourceModel {
    load_model(SPACE_MODEL).expect("bundled model loads")
}
