#include <stdio.h>
#include "qshell.h"

int main(void) {
    QshShellTable *t = NULL;
    if (qsh_shell_table_new(0.038, 0.39, 22.6, &t) != QSH_STATUS_OK) {
        fprintf(stderr, "%s\n", qsh_last_error_message());
        return 1;
    }
    uint32_t magic[64];
    size_t n = 0;
    if (qsh_shell_table_magic(t, magic, 64, &n) != QSH_STATUS_OK) return 1;
    for (size_t i = 0; i < n; i++) printf("%u%c", magic[i], i + 1 == n ? '\n' : ' ');
    qsh_shell_table_free(t);
    return 0;
}
