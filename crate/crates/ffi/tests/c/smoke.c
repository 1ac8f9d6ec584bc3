#include <stdio.h>
#include <string.h>

#include "urykit.h"

static int fail(const char *what) {
    const char *err = uk_last_error();
    fprintf(stderr, "%s: %s\n", what, err ? err : "(no message)");
    return 1;
}

int main(void) {
    UkSpace *space = NULL;
    const char *json = "{\"points\":[\"p\",\"q\"],\"dist\":[[\"0\",\"2\"],[\"2\",\"0\"]]}";
    if (uk_space_from_json(json, &space) != UK_STATUS_OK) return fail("parse");

    size_t z = 0;
    if (uk_space_realize(space, "{\"domain\":[\"p\"],\"values\":[\"1\"]}", &z) != UK_STATUS_OK) return fail("realize");
    char *d = NULL;
    if (uk_space_distance(space, z, 1, &d) != UK_STATUS_OK) return fail("distance");
    if (strcmp(d, "3") != 0) return fail("expected distance 3");
    uk_string_free(d);

    if (uk_space_from_json("{\"points\":[\"p\"]", &space) != UK_STATUS_PARSE) return fail("truncated json");
    if (uk_last_error() == NULL) return fail("missing message");

    char *trace = NULL;
    if (uk_stabilize_random(7, "1/100", 10000, &trace) != UK_STATUS_OK) return fail("stabilize");
    if (strstr(trace, "\"within_epsilon\": true") == NULL) return fail("trace");
    uk_string_free(trace);

    uk_space_free(space);
    puts("ok");
    return 0;
}
