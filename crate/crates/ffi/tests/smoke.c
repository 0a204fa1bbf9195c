#include <stdio.h>
#include <string.h>
#include "sunny.h"

int main(int argc, char **argv) {
    if (argc != 3) return 64;
    SunnyKnowledgeBase *kb = NULL;
    if (sunny_kb_load(argv[1], argv[2], 1800.0, &kb) != SUNNY_STATUS_OK) {
        fprintf(stderr, "%s\n", sunny_last_error());
        return 1;
    }
    double query[2] = {2.0, 11.0};
    SunnySchedule *s = NULL;
    if (sunny_schedule_build(kb, query, 2, 5, "s3", &s) != SUNNY_STATUS_OK) {
        fprintf(stderr, "%s\n", sunny_last_error());
        return 2;
    }
    for (size_t i = 0; i < sunny_schedule_len(s); i++) {
        printf("%s %.3f\n", sunny_schedule_solver(s, i), sunny_schedule_seconds(s, i));
    }
    bool solved = false;
    double secs = 0.0;
    if (sunny_simulate(kb, s, "p4", &solved, &secs) != SUNNY_STATUS_OK) return 3;
    printf("p4 %d %.3f\n", solved, secs);

    SunnySchedule *bad = NULL;
    SunnyStatus st = sunny_schedule_build(kb, query, 1, 5, "s3", &bad);
    printf("mismatch %d\n", (int)st);

    sunny_schedule_free(s);
    sunny_kb_free(kb);
    return 0;
}
