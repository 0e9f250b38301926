//! Fixtures and slow-but-exact reference implementations used by the test
//! suites of the workspace. Never a dependency of production code.

pub mod fixtures;
pub mod oracle;
