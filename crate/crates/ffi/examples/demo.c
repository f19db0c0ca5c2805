/* SPDX-License-Identifier: Apache-2.0 */
/* cc demo.c -I../include ../../../target/debug/libifog_ffi.a -lpthread -ldl -lm */
#include <stdio.h>
#include "ifog.h"

int main(int argc, char **argv) {
    const char *src = argc > 1 ? argv[1] : "forall X. P(X) \\/ (P(X) -> false)";
    IfogFormula *f = NULL;
    if (ifog_formula_parse(src, &f) != IfogStatus_Ok) {
        fprintf(stderr, "%s\n", ifog_last_error());
        return 1;
    }
    char *out = NULL;
    IfogStatus st = ifog_prove(f, ifog_caps_default(), &out);
    if (out) {
        printf("%s\n", out);
        ifog_string_free(out);
    }
    ifog_formula_free(f);
    return st == IfogStatus_Ok ? 0 : 2;
}
