#include <stdio.h>
#include <string.h>
#include "ranklabel.h"

static const char CSV[] =
    "score,group\n9,x\n8,y\n7,x\n6,y\n5,x\n4,y\n";

int main(void) {
    RlDataset *ds = NULL;
    RlLabel *label = NULL;
    char *json = NULL;
    size_t table[10];

    if (rl_dataset_load_csv((const uint8_t *)CSV, strlen(CSV), &ds) != RL_OK) return 1;
    if (rl_dataset_row_count(ds) != 6) return 2;
    if (rl_label_build(ds, "{\"weights\":{\"score\":1},\"sensitive_attribute\":\"group\",\"k\":4}", &label) != RL_OK) {
        fprintf(stderr, "%s\n", rl_last_error_message());
        return 3;
    }
    if (rl_label_to_json(label, &json) != RL_OK) return 4;
    if (strstr(json, "\"label_schema\"") == NULL) return 5;
    rl_string_free(json);
    rl_label_free(label);

    if (rl_label_build(ds, "{\"weights\":{\"nope\":1},\"sensitive_attribute\":\"group\"}", &label) != RL_UNKNOWN_ATTRIBUTE) return 6;
    if (strstr(rl_last_error_message(), "nope") == NULL) return 7;
    rl_dataset_free(ds);

    if (rl_fair_min_table(10, 0.5, 0.1, table, 10) != RL_OK || table[9] != 3) return 8;
    printf("ok %s\n", rl_version());
    return 0;
}
