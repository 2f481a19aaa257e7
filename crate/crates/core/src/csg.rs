//! Coalition structure enumeration and search for structures in which every
//! operative agent supports a functionality set.

use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use crate::agents::{connection_feasible, AtomicAgent, CoalitionStructure, GeneralAgent, GeneralAgentType};
use crate::capability::efficacy_type;
use crate::error::{Error, Result};
use crate::ontology::ResourceModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsgBudget {
    /// Largest pool handled by exact enumeration.
    pub max_atoms: usize,
    pub deadline: Option<Duration>,
}

impl Default for CsgBudget {
    fn default() -> Self {
        CsgBudget {
            max_atoms: 8,
            deadline: None,
        }
    }
}

struct Clock {
    start: Instant,
    deadline: Option<Duration>,
}

impl Clock {
    fn new(budget: &CsgBudget) -> Self {
        Clock {
            start: Instant::now(),
            deadline: budget.deadline,
        }
    }

    fn check(&self) -> Result<()> {
        match self.deadline {
            Some(d) if self.start.elapsed() > d => Err(Error::BudgetExceeded(format!(
                "coalition search exceeded its {:.3} s deadline",
                d.as_secs_f64()
            ))),
            _ => Ok(()),
        }
    }
}

fn check_size(n: usize, budget: &CsgBudget) -> Result<()> {
    if budget.max_atoms == 0 {
        return Err(Error::Domain("max_atoms must be >= 1".into()));
    }
    if n > budget.max_atoms {
        return Err(Error::BudgetExceeded(format!(
            "pool of {n} atoms exceeds the exact enumeration limit of {}",
            budget.max_atoms
        )));
    }
    Ok(())
}

/// Every set partition of `pool` whose blocks all pass
/// [`connection_feasible`], in restricted-growth-string order.
pub fn enumerate_structures(
    model: &ResourceModel,
    pool: &BTreeSet<AtomicAgent>,
    budget: &CsgBudget,
) -> Result<Vec<CoalitionStructure>> {
    let atoms: Vec<&AtomicAgent> = pool.iter().collect();
    let n = atoms.len();
    check_size(n, budget)?;
    let clock = Clock::new(budget);
    let mut out = Vec::new();
    if n == 0 {
        return Ok(out);
    }

    let mut feasible: HashMap<GeneralAgentType, bool> = HashMap::new();
    // restricted growth string: a[0] = 0, a[i] <= 1 + max(a[..i])
    let mut a = vec![0usize; n];
    let mut maxes = vec![0usize; n];
    loop {
        clock.check()?;
        let blocks = maxes[n - 1] + 1;
        let mut members: Vec<Vec<AtomicAgent>> = vec![Vec::new(); blocks];
        for (i, &b) in a.iter().enumerate() {
            members[b].push(atoms[i].clone());
        }
        let mut ok = true;
        let mut agents = Vec::with_capacity(blocks);
        for m in members {
            let ga = GeneralAgent::new(m)?;
            let t = ga.agent_type();
            let f = match feasible.get(&t) {
                Some(f) => *f,
                None => {
                    let f = connection_feasible(model, &t)?;
                    feasible.insert(t, f);
                    f
                }
            };
            if !f {
                ok = false;
                break;
            }
            agents.push(ga);
        }
        if ok {
            out.push(CoalitionStructure::new(pool, agents)?);
        }

        // next string
        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            if a[i] <= maxes[i - 1] {
                a[i] += 1;
                maxes[i] = maxes[i - 1].max(a[i]);
                for j in i + 1..n {
                    a[j] = 0;
                    maxes[j] = maxes[i];
                }
                break;
            }
            i -= 1;
        }
    }
}

struct TypedSearch<'a> {
    model: &'a ResourceModel,
    functionalities: &'a [&'a str],
    names: Vec<&'a str>,
    cache: HashMap<Vec<u32>, bool>,
    clock: Clock,
}

impl TypedSearch<'_> {
    fn block_ok(&mut self, counts: &[u32]) -> Result<bool> {
        if let Some(v) = self.cache.get(counts) {
            return Ok(*v);
        }
        let t = GeneralAgentType::from_pairs(self.names.iter().zip(counts).map(|(n, c)| (*n, *c)));
        let ok = connection_feasible(self.model, &t)?
            && efficacy_type(self.model, &t, self.functionalities.iter().copied())? == 1;
        self.cache.insert(counts.to_vec(), ok);
        Ok(ok)
    }

    /// Partitions of `remaining` into exactly `k` blocks, each block no
    /// greater (as a count vector) than `upper`, blocks non-increasing.
    fn partitions(
        &mut self,
        remaining: &mut Vec<u32>,
        upper: &[u32],
        k: usize,
        current: &mut Vec<Vec<u32>>,
        out: &mut Vec<Vec<Vec<u32>>>,
    ) -> Result<()> {
        self.clock.check()?;
        let left: u32 = remaining.iter().sum();
        if k == 0 {
            if left == 0 {
                out.push(current.clone());
            }
            return Ok(());
        }
        if (left as usize) < k {
            return Ok(());
        }
        let mut block = vec![0u32; remaining.len()];
        self.sub_blocks(remaining, upper, k, 0, &mut block, current, out)
    }

    #[allow(clippy::too_many_arguments)]
    fn sub_blocks(
        &mut self,
        remaining: &mut Vec<u32>,
        upper: &[u32],
        k: usize,
        pos: usize,
        block: &mut Vec<u32>,
        current: &mut Vec<Vec<u32>>,
        out: &mut Vec<Vec<Vec<u32>>>,
    ) -> Result<()> {
        if pos == block.len() {
            if block.iter().all(|&c| c == 0) || block.as_slice() > upper {
                return Ok(());
            }
            if !self.block_ok(block)? {
                return Ok(());
            }
            for (r, b) in remaining.iter_mut().zip(block.iter()) {
                *r -= b;
            }
            current.push(block.clone());
            let up = block.clone();
            self.partitions(remaining, &up, k - 1, current, out)?;
            current.pop();
            for (r, b) in remaining.iter_mut().zip(block.iter()) {
                *r += b;
            }
            return Ok(());
        }
        for c in (0..=remaining[pos]).rev() {
            block[pos] = c;
            // prune: prefix already above the bound
            if block[..=pos] > upper[..=pos] {
                continue;
            }
            self.sub_blocks(remaining, upper, k, pos + 1, block, current, out)?;
        }
        block[pos] = 0;
        Ok(())
    }
}

/// A structure over `pool` in which every block is connection-feasible and
/// supports all of `functionalities`, or `None` if there is none.
///
/// Among feasible structures the one with the fewest blocks wins, ties
/// broken by the lexicographically smallest sorted list of block types;
/// atoms are bound to blocks in id order. With no functionalities the
/// all-singletons structure is returned.
pub fn find_feasible_structure(
    model: &ResourceModel,
    pool: &BTreeSet<AtomicAgent>,
    functionalities: &[&str],
    budget: &CsgBudget,
) -> Result<Option<CoalitionStructure>> {
    for f in functionalities {
        model.resource_requirements(f)?;
    }
    for a in pool {
        model.agent_type(&a.agent_type)?;
    }
    check_size(pool.len(), budget)?;
    if functionalities.is_empty() || pool.is_empty() {
        return Ok(Some(CoalitionStructure::singletons(pool)));
    }

    let mut pool_type = GeneralAgentType::new();
    for a in pool {
        pool_type.add(a.agent_type.as_str(), 1);
    }
    let names: Vec<&str> = pool_type.types().collect();
    let counts: Vec<u32> = pool_type.iter().map(|(_, c)| c).collect();
    let mut search = TypedSearch {
        model,
        functionalities,
        names: names.clone(),
        cache: HashMap::new(),
        clock: Clock::new(budget),
    };

    for k in 1..=pool.len() {
        let mut out = Vec::new();
        let mut remaining = counts.clone();
        search.partitions(&mut remaining, &counts, k, &mut Vec::new(), &mut out)?;
        let best = out
            .into_iter()
            .map(|blocks| {
                let mut types: Vec<GeneralAgentType> = blocks
                    .iter()
                    .map(|b| GeneralAgentType::from_pairs(names.iter().zip(b).map(|(n, c)| (*n, *c))))
                    .collect();
                types.sort();
                types
            })
            .min();
        if let Some(types) = best {
            return Ok(Some(bind(pool, &types)?));
        }
    }
    Ok(None)
}

fn bind(pool: &BTreeSet<AtomicAgent>, types: &[GeneralAgentType]) -> Result<CoalitionStructure> {
    let mut by_type: HashMap<&str, Vec<&AtomicAgent>> = HashMap::new();
    for a in pool {
        by_type.entry(a.agent_type.as_str()).or_default().push(a);
    }
    let mut next: HashMap<&str, usize> = HashMap::new();
    let mut agents = Vec::with_capacity(types.len());
    for t in types {
        let mut members = Vec::new();
        for (name, c) in t.iter() {
            let i = next.entry(name).or_insert(0);
            let list = &by_type[name];
            members.extend(list[*i..*i + c as usize].iter().map(|a| (*a).clone()));
            *i += c as usize;
        }
        agents.push(GeneralAgent::new(members)?);
    }
    CoalitionStructure::new(pool, agents)
}
