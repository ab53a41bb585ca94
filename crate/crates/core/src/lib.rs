// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

pub mod container;
pub mod error;
pub mod harness;
pub mod index;
pub mod lattice;
pub mod linalg;
pub mod nuclearity;
pub mod quantization;
pub mod symbol;
