//! Exact computation in the torus-equivariant quantum K-ring of the type C_n
//! complete flag manifold, plus a harness that checks the quantum K-theoretic
//! Whitney, Borel and presentation identities.

pub mod alcove;
pub mod chevalley;
pub mod cli;
pub mod polyring;
pub mod qbg;
pub mod qkring;
pub mod rootsys;
pub mod verify;
