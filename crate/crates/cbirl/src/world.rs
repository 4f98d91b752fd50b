//! A clonable, owned environment covering every built-in task.

use cbirl_core::env::{
    ChainWorld, Discretized, EnvError, EnvSpec, Environment, GridWorld, MountainCar, PointMass, Simulator,
    StateDiscretizer, StepResult,
};
use cbirl_core::State;

#[derive(Debug, Clone)]
pub enum World {
    Chain(Simulator<ChainWorld>),
    Grid(Simulator<GridWorld>),
    MountainCar(Simulator<MountainCar>),
    PointMass(Simulator<Discretized<PointMass>>),
}

macro_rules! each {
    ($self:expr, $sim:ident => $body:expr) => {
        match $self {
            World::Chain($sim) => $body,
            World::Grid($sim) => $body,
            World::MountainCar($sim) => $body,
            World::PointMass($sim) => $body,
        }
    };
}

impl World {
    pub fn chain(task: ChainWorld) -> Self {
        World::Chain(Simulator::new(task))
    }

    pub fn grid(task: GridWorld) -> Self {
        World::Grid(Simulator::new(task))
    }

    pub fn mountain_car(task: MountainCar) -> Self {
        World::MountainCar(Simulator::new(task))
    }

    pub fn point_mass(task: Discretized<PointMass>) -> Self {
        World::PointMass(Simulator::new(task))
    }

    pub fn as_grid(&self) -> Option<&GridWorld> {
        match self {
            World::Grid(sim) => Some(sim.dynamics()),
            _ => None,
        }
    }
}

impl Environment for World {
    fn spec(&self) -> EnvSpec {
        each!(self, sim => sim.spec())
    }

    fn reset(&mut self, seed: u64) -> State {
        each!(self, sim => sim.reset(seed))
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        each!(self, sim => sim.step(action))
    }

    fn discretizer(&self) -> Option<StateDiscretizer> {
        each!(self, sim => sim.discretizer())
    }

    fn is_target(&self, state: &[f64]) -> bool {
        each!(self, sim => sim.is_target(state))
    }
}
