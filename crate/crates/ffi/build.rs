// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    let src = dir.join("src/lib.rs");
    println!("cargo:rerun-if-changed={}", src.display());
    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("IFOG_H".into()),
        header: Some("/* SPDX-License-Identifier: Apache-2.0 */".into()),
        autogen_warning: Some("/* Generated by cbindgen from crates/ffi/src/lib.rs. */".into()),
        cpp_compat: true,
        enumeration: cbindgen::EnumConfig {
            prefix_with_name: true,
            ..Default::default()
        },
        ..Default::default()
    };
    cbindgen::Builder::new()
        .with_config(config)
        .with_src(&src)
        .generate()
        .expect("generate ifog.h")
        .write_to_file(dir.join("include/ifog.h"));
}
