use memswitch_core::{build_thresholds, Controller, ControllerConfig, LadderConfig, Topology};

use crate::device::{DeviceConfig, VirtualDevice};
use crate::SimError;

/// The firmware core running against a [`VirtualDevice`].
///
/// Each [`tick`](SimRig::tick) runs one main-loop pass and then advances the
/// device by `loop_period_ms`. Time spent inside the pass itself (the
/// debounce wait) is charged to the device clock as well.
#[derive(Debug, Clone)]
pub struct SimRig {
    pub device: VirtualDevice,
    pub controller: Controller,
    pub loop_period_ms: f64,
}

impl SimRig {
    pub fn new(
        topology: Topology,
        device_config: &DeviceConfig,
        controller_config: ControllerConfig,
    ) -> Result<Self, SimError> {
        let ladder = LadderConfig::with_buttons(topology.n_ports as usize);
        Self::with_ladder(topology, ladder, device_config, controller_config)
    }

    pub fn with_ladder(
        topology: Topology,
        ladder: LadderConfig,
        device_config: &DeviceConfig,
        controller_config: ControllerConfig,
    ) -> Result<Self, SimError> {
        let table = build_thresholds(&ladder)?;
        let mut controller = Controller::new(topology.clone(), table, controller_config)?;
        let mut device = VirtualDevice::new(topology, ladder, device_config);
        controller.power_on(&mut device);
        Ok(Self { device, controller, loop_period_ms: 1.0 })
    }

    pub fn tick(&mut self) {
        self.controller.tick(&mut self.device);
        self.device.step(self.loop_period_ms).expect("loop period is positive");
    }

    /// Ticks until at least `ms` of simulated time has passed.
    pub fn run_for(&mut self, ms: f64) {
        let until = self.device.clock_ms + ms;
        while self.device.clock_ms < until {
            self.tick();
        }
    }

    /// Ticks until no host byte is queued and no relay is mid-transition,
    /// giving up after `max_ms`. Returns whether the rig settled.
    pub fn settle(&mut self, max_ms: f64) -> bool {
        let until = self.device.clock_ms + max_ms;
        while self.device.clock_ms < until {
            self.tick();
            if self.device.rx_pending() == 0 && !self.device.has_pending_relays() {
                return true;
            }
        }
        false
    }

    pub fn selected(&self) -> Option<u8> {
        self.controller.state().selected
    }
}
