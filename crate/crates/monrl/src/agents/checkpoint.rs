//! Atomic agent checkpoints: networks, optimizer moments, progress counters,
//! and buffer cursors. Replay contents are not persisted; a resumed run
//! refills its buffer and rejoins the derived random streams via the
//! episode counter.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nanonet::{load_params_expecting, save_params, OptimizerState32};

use crate::agents::dqn::{Agent, AgentVariant, TrainState};
use crate::agents::schedule::TrainingSchedule;
use crate::RlError;

const MAGIC: &[u8; 4] = b"MRLC";
const VERSION: u32 = 1;

fn w_u32<W: Write>(w: &mut W, x: u32) -> Result<(), RlError> {
    w.write_all(&x.to_le_bytes())?;
    Ok(())
}

fn w_u64<W: Write>(w: &mut W, x: u64) -> Result<(), RlError> {
    w.write_all(&x.to_le_bytes())?;
    Ok(())
}

fn r_u32<R: Read>(r: &mut R) -> Result<u32, RlError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn r_u64<R: Read>(r: &mut R) -> Result<u64, RlError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn write_opt<W: Write>(
    w: &mut W,
    arch: &nanonet::Architecture,
    opt: &OptimizerState32,
) -> Result<(), RlError> {
    save_params(w, arch, &opt.m)?;
    save_params(w, arch, &opt.v)?;
    w_u64(w, opt.step)?;
    Ok(())
}

fn read_opt<R: Read>(
    r: &mut R,
    arch: &nanonet::Architecture,
    opt: &mut OptimizerState32,
) -> Result<(), RlError> {
    opt.m = load_params_expecting(r, arch)?;
    opt.v = load_params_expecting(r, arch)?;
    opt.step = r_u64(r)?;
    Ok(())
}

pub fn save_checkpoint(path: &Path, agent: &Agent, state: &TrainState) -> Result<(), RlError> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(MAGIC)?;
        w_u32(&mut w, VERSION)?;
        w_u32(
            &mut w,
            match agent.variant {
                AgentVariant::RewardModel => 0,
                AgentVariant::BotZero => 1,
                AgentVariant::Ignore => 2,
            },
        )?;
        w_u32(&mut w, agent.q.env_actions as u32)?;
        w_u32(&mut w, agent.q.mon_states as u32)?;
        w_u32(&mut w, agent.q.mon_actions as u32)?;
        w_u32(&mut w, agent.q.arch.input.1 as u32)?;
        w_u64(&mut w, state.episode)?;
        w_u64(&mut w, state.steps_done)?;
        w_u64(&mut w, state.steps_since_round)?;
        w_u64(&mut w, agent.q.updates)?;
        w_u64(&mut w, agent.buffer.cursor() as u64)?;
        w_u64(&mut w, agent.buffer.total_pushed())?;
        w_u64(&mut w, agent.observed.cursor() as u64)?;
        w_u64(&mut w, agent.observed.total_pushed())?;
        save_params(&mut w, &agent.q.arch, &agent.q.online)?;
        save_params(&mut w, &agent.q.arch, &agent.q.target)?;
        write_opt(&mut w, &agent.q.arch, &agent.q.opt)?;
        w_u32(&mut w, u32::from(agent.reward_model.is_some()))?;
        if let Some(rm) = &agent.reward_model {
            save_params(&mut w, &rm.arch, &rm.params)?;
            write_opt(&mut w, &rm.arch, &rm.opt)?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Rebuilds an agent from a checkpoint. The training schedule comes from the
/// caller's configuration and must match the one the checkpoint was written
/// under; replay buffers start empty.
pub fn load_checkpoint(
    path: &Path,
    schedule: TrainingSchedule,
    seed: u64,
) -> Result<(Agent, TrainState), RlError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(RlError::Checkpoint("bad magic".into()));
    }
    let version = r_u32(&mut r)?;
    if version != VERSION {
        return Err(RlError::Checkpoint(format!("unsupported version {version}")));
    }
    let variant = match r_u32(&mut r)? {
        0 => AgentVariant::RewardModel,
        1 => AgentVariant::BotZero,
        2 => AgentVariant::Ignore,
        v => return Err(RlError::Checkpoint(format!("unknown variant tag {v}"))),
    };
    let env_actions = r_u32(&mut r)? as usize;
    let mon_states = r_u32(&mut r)? as usize;
    let mon_actions = r_u32(&mut r)? as usize;
    let window = r_u32(&mut r)? as usize;
    let state = TrainState {
        episode: r_u64(&mut r)?,
        steps_done: r_u64(&mut r)?,
        steps_since_round: r_u64(&mut r)?,
    };
    let updates = r_u64(&mut r)?;
    let _buffer_cursor = r_u64(&mut r)?;
    let _buffer_pushed = r_u64(&mut r)?;
    let _observed_cursor = r_u64(&mut r)?;
    let _observed_pushed = r_u64(&mut r)?;

    let mut agent = Agent::new(variant, window, env_actions, mon_states, mon_actions, schedule, seed)?;
    agent.q.online = load_params_expecting(&mut r, &agent.q.arch)?;
    agent.q.target = load_params_expecting(&mut r, &agent.q.arch)?;
    read_opt(&mut r, &agent.q.arch.clone(), &mut agent.q.opt)?;
    agent.q.updates = updates;
    let has_rm = r_u32(&mut r)? == 1;
    if has_rm != agent.reward_model.is_some() {
        return Err(RlError::Checkpoint("reward-model presence mismatch".into()));
    }
    if let Some(rm) = agent.reward_model.as_mut() {
        let arch = rm.arch;
        rm.params = load_params_expecting(&mut r, &arch)?;
        read_opt(&mut r, &arch, &mut rm.opt)?;
    }
    Ok((agent, state))
}
