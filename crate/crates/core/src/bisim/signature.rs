//! Signature-based partition refinement for systems without silent steps.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::sos::SigmaLts;

use super::branching::Product;
use super::TAU;

/// Strong bisimilarity of the roots by iterated signature refinement.
///
/// Without `tau` transitions this coincides with rooted branching
/// bisimilarity; inputs with a `tau` transition are rejected.
pub fn signature_bisim(l1: &SigmaLts, l2: &SigmaLts) -> Result<bool> {
    let prod = Product::new(l1, l2)?;
    let n1 = l1.num_states();
    let n = n1 + l2.num_states();
    let views = |s: usize| if s < n1 { (&prod.left, s, true) } else { (&prod.right, s - n1, false) };
    for s in 0..n {
        let (v, x, _) = views(s);
        if v.succ[x].iter().flatten().any(|&(c, _)| c == TAU) {
            return Err(Error::Unsupported("signature refinement needs a tau-free system".into()));
        }
    }
    let mut block = vec![0usize; n];
    let mut count = 1;
    loop {
        let mut ids: HashMap<Vec<(usize, u32, usize)>, usize> = HashMap::new();
        let mut next = vec![0; n];
        for s in 0..n {
            let (v, x, is_left) = views(s);
            let offset = if is_left { 0 } else { n1 };
            let mut sig = Vec::new();
            for (j, (m1, m2, _)) in prod.joint.iter().enumerate() {
                let m = if is_left { *m1 } else { *m2 };
                if v.term[x][m] {
                    sig.push((j, u32::MAX, 0));
                }
                sig.extend(v.succ[x][m].iter().map(|&(c, t)| (j, c, block[t + offset])));
            }
            sig.sort_unstable();
            sig.dedup();
            sig.push((usize::MAX, 0, block[s]));
            let fresh = ids.len();
            next[s] = *ids.entry(sig).or_insert(fresh);
        }
        block = next;
        if ids.len() == count {
            break;
        }
        count = ids.len();
    }
    Ok(block[l1.root] == block[n1 + l2.root])
}
