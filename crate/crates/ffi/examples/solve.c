/* Reads an instance file, solves it, prints status and total cost. */
#include <stdio.h>
#include <stdlib.h>

#include "recovery.h"

static char *slurp(const char *path) {
  FILE *f = fopen(path, "rb");
  if (!f) return NULL;
  fseek(f, 0, SEEK_END);
  long n = ftell(f);
  rewind(f);
  char *buf = malloc((size_t)n + 1);
  if (buf && fread(buf, 1, (size_t)n, f) != (size_t)n) {
    free(buf);
    buf = NULL;
  }
  if (buf) buf[n] = '\0';
  fclose(f);
  return buf;
}

int main(int argc, char **argv) {
  if (argc < 2) {
    fprintf(stderr, "usage: %s INSTANCE.json\n", argv[0]);
    return 2;
  }
  char *text = slurp(argv[1]);
  if (!text) {
    perror(argv[1]);
    return 2;
  }
  RecInstance *inst = NULL;
  RecStatus s = rec_instance_from_json(text, &inst);
  free(text);
  if (s != REC_STATUS_OK) {
    fprintf(stderr, "load: %s\n", rec_last_error());
    return 1;
  }
  RecReport *rep = NULL;
  if (rec_solve(inst, REC_METHOD_BCG, &rep) != REC_STATUS_OK) {
    fprintf(stderr, "solve: %s\n", rec_last_error());
    rec_instance_free(inst);
    return 1;
  }
  RecRunStatus st;
  double cost = 0.0;
  rec_report_status(rep, &st);
  rec_report_total_cost(rep, &cost);
  printf("status %d cost %.2f\n", (int)st, cost);
  rec_report_free(rep);
  rec_instance_free(inst);
  return 0;
}
