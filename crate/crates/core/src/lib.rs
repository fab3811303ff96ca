// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Path-sliced symbolic execution with a language model as the decision
//! procedure.

pub mod cfg;
pub mod driver;
pub mod frontend;
pub mod mini_lang;
pub mod oracle;
pub mod partition;
pub mod render;
pub mod slice;
