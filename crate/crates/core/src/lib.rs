//! Exact piecewise-linear integer chains on finite simplicial complexes,
//! nerve approximation of finite metric spaces, Federer-Fleming deformation
//! with local mass ledgers, and filling volume / flat norm computation by
//! exact linear programming.

pub mod chain;
pub mod cli;
pub mod complex;
pub mod deform;
pub mod fill;
pub mod geom;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod nerve;
pub mod rational;
