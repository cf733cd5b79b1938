/* Drives the C interface end to end; prints one line per observation. */
#include <stdio.h>
#include "hodecomp.h"

int main(void) {
    const char *src = "new s : !<Int>;?<Bool>;end in (s!(1).s?(b).0 | ~s?(x).~s!(true).0)";
    HdProcess *p = NULL;
    if (hd_process_parse(src, HD_SYNTAX_HO, &p) != HD_STATUS_OK) {
        printf("parse failed: %s\n", hd_last_error());
        return 1;
    }
    bool ok = false;
    hd_process_typecheck(p, &ok);
    uint32_t degree = 0;
    hd_process_degree(p, &degree);
    printf("typed %d degree %u\n", ok, degree);

    HdDecomposition *d = NULL;
    if (hd_decompose(p, HD_OPTIMIZATION_NONE, &d) != HD_STATUS_OK) {
        printf("decompose failed: %s\n", hd_last_error());
        return 1;
    }
    bool minimal = false;
    hd_decomposition_is_minimally_typed(d, &minimal);
    printf("minimal %d\n", minimal);

    HdTrace *t = NULL;
    hd_decomposition_run(d, 100, &t);
    size_t steps = 0;
    enum HdTerminal end = HD_TERMINAL_STUCK;
    hd_trace_steps(t, &steps);
    hd_trace_terminal(t, &end);
    printf("inert %d\n", end == HD_TERMINAL_INERT && steps > 0);

    HdProcess *bad = NULL;
    HdStatus st = hd_process_parse("a!(1.0", HD_SYNTAX_HO, &bad);
    printf("parse status %d\n", (int)st);

    char *text = hd_process_to_string(p);
    printf("text %s\n", text);
    hd_string_free(text);
    hd_trace_free(t);
    hd_decomposition_free(d);
    hd_process_free(p);
    return 0;
}
