//! Shared unit-test fixtures.

pub(crate) const SHERPA_MODEL: &str = r#"
concepts:
  Resource: {kind: resource}
  Localization: {parent: Resource, p_survival: 0.95}
  Locomotion: {parent: Resource, p_survival: 0.95}
  Mapping: {parent: Resource, p_survival: 0.95}
  PowerSource: {parent: Resource, p_survival: 0.95}
  PayloadBattery-PowerSource: {parent: PowerSource}
  Camera: {parent: Resource, p_survival: 0.95}
  TransportBay: {parent: Resource, p_survival: 0.99}
  EmiInterface: {kind: interface}
  Idle: {kind: functionality}
functionalities:
  ImageProvider: {requires: {Camera: 1, PowerSource: 1}}
  MoveTo: {requires: {Localization: 1, Locomotion: 1, Mapping: 1, PowerSource: 1}}
  LocationImageProvider: {requires: {ImageProvider: 1, MoveTo: 1}}
  StereoImaging: {requires: {Camera: 2}}
  TransportProvider: {requires: {MoveTo: 1, TransportBay: 1}}
agent_types:
  SherpaTT:
    resources: {Localization: 1, Locomotion: 1, Mapping: 1, PowerSource: 1, Camera: 2, TransportBay: 1}
    interfaces:
      - {type: EmiInterface, gender: male, count: 4}
      - {type: EmiInterface, gender: female, count: 2}
    properties: {esourcecap: 10, esupply: 24, pw: 100, tcap: 10, tcon: 1, v_nom: 0.5}
  CoyoteIII:
    resources: {Localization: 1, Locomotion: 1, Mapping: 1, PowerSource: 1, Camera: 1, TransportBay: 1}
    interfaces:
      - {type: EmiInterface, gender: female, count: 1}
    properties: {pw: 60, tcap: 4, tcon: 1, v_nom: 0.8}
  Payload:
    resources: {Camera: 1}
    interfaces:
      - {type: EmiInterface, gender: male, count: 1}
      - {type: EmiInterface, gender: female, count: 1}
    properties: {pw: 5, tcap: 0, tcon: 1, v_nom: 0}
  PayloadBattery:
    resources: {PayloadBattery-PowerSource: 1}
    interfaces:
      - {type: EmiInterface, gender: male, count: 1}
      - {type: EmiInterface, gender: female, count: 1}
    properties: {pw: 0, tcap: 0, tcon: 1, v_nom: 0}
formulas:
  ecap: esourcecap * esupply
"#;
