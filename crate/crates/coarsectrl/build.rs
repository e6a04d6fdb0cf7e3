fn main() {
    // LAPACK/BLAS provider for the `lapack` FFI bindings.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
