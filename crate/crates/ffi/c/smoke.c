#include <stdio.h>
#include <stdlib.h>

#include "hfce.h"

#define CHECK(call)                                                  \
  do {                                                               \
    HfceStatus s_ = (call);                                          \
    if (s_ != HFCE_STATUS_OK) {                                      \
      fprintf(stderr, "%s: %d %s\n", #call, s_, hfce_last_error());  \
      return 1;                                                      \
    }                                                                \
  } while (0)

int main(void) {
  HfceConfig *cfg = NULL;
  HfceDictionary *dict = NULL;
  HfceChannel *ch = NULL;
  HfceEstimate *est = NULL;
  size_t rows, cols, paths;
  double nmse;

  CHECK(hfce_config_desk(&cfg));
  CHECK(hfce_dictionary_build(cfg, HFCE_DICTIONARY_KIND_POLAR, &dict));
  CHECK(hfce_dictionary_shape(dict, &rows, &cols));
  CHECK(hfce_channel_generate(cfg, 0, &ch));
  CHECK(hfce_channel_shape(ch, &rows, &cols, &paths));
  CHECK(hfce_estimate(cfg, dict, ch, 10.0, 0, 0, &est));
  CHECK(hfce_estimate_nmse_db(est, ch, &nmse));
  printf("hfce %s: %zux%zu channel, %zu paths, NMSE %.2f dB\n", hfce_version(), rows, cols, paths, nmse);

  hfce_estimate_free(est);
  hfce_channel_free(ch);
  hfce_dictionary_free(dict);
  hfce_config_free(cfg);
  return 0;
}
