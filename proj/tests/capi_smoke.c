#include <stdio.h>

#include "udw/udw.h"

int main(void) {
    udw_options* o = NULL;
    udw_result* r = NULL;
    int code;
    if (udw_options_new(&o) != UDW_OK) return 1;
    udw_options_set_format(o, UDW_FORMAT_SUMMARY);
    code = (int)udw_verify("bell", NULL, o, &r);
    if (r) fputs(udw_result_text(r), stdout);
    udw_result_free(r);
    udw_options_free(o);
    printf("version=%s\n", udw_version());
    return code;
}
