use std::path::Path;

use cbirl_core::agent::{AgentConfig, DeepQ, QAgent, TabularQ};
use cbirl_core::env::Environment;

use super::{parse_net, parse_qtable, read, write, write_net, write_qtable, FormatError};

/// Writes a policy as a Q table (tabular agents) or a network snapshot.
pub fn save_policy(path: &Path, agent: &QAgent) -> Result<(), FormatError> {
    let text = match agent {
        QAgent::Tabular(q) => write_qtable(q),
        QAgent::Approx(q) => write_net(q.online()),
    };
    write(path, &text)
}

/// Reads either snapshot kind back into a policy for `env`.
pub fn load_policy(path: &Path, env: &dyn Environment, cfg: &AgentConfig) -> Result<QAgent, FormatError> {
    let text = read(path)?;
    let spec = env.spec();
    let mismatch = |what: &str| FormatError::Invalid(format!("{}: {what}", path.display()));
    if text.trim_start().starts_with("cbirl-qtable") {
        let disc = env
            .discretizer()
            .ok_or_else(|| mismatch("Q table given for an environment without a state enumeration"))?;
        let mut q = TabularQ::new(disc, spec.action_count, cfg);
        q.set_table(parse_qtable(&text, q.cell_count(), spec.action_count)?)
            .map_err(|e| mismatch(&e.to_string()))?;
        Ok(QAgent::Tabular(q))
    } else {
        let net = parse_net(&text)?;
        if net.input_len() != spec.state_dim || net.output_len() != spec.action_count {
            return Err(mismatch("network shape does not match the environment"));
        }
        Ok(QAgent::Approx(DeepQ::from_net(net, cfg)))
    }
}
