#ifndef HFCE_H
#define HFCE_H

#include <stddef.h>
#include <stdint.h>

typedef enum HfceStatus {
  HFCE_STATUS_OK = 0,
  HFCE_STATUS_INVALID_ARGUMENT = 1,
  HFCE_STATUS_DEGENERATE_GEOMETRY = 2,
  HFCE_STATUS_SHAPE_MISMATCH = 3,
  HFCE_STATUS_FORMAT = 4,
  HFCE_STATUS_CONFIG = 5,
  HFCE_STATUS_VALIDATION = 6,
  HFCE_STATUS_IO = 7,
  HFCE_STATUS_NULL_POINTER = 8,
  HFCE_STATUS_BUFFER_TOO_SMALL = 9,
  HFCE_STATUS_PANIC = 10,
} HfceStatus;

typedef enum HfceDictionaryKind {
  HFCE_DICTIONARY_KIND_POLAR = 0,
  HFCE_DICTIONARY_KIND_ANGULAR = 1,
} HfceDictionaryKind;

typedef struct HfceChannel HfceChannel;

typedef struct HfceConfig HfceConfig;

typedef struct HfceDictionary HfceDictionary;

typedef struct HfceEstimate HfceEstimate;

typedef struct HfceTensor HfceTensor;

/*
 Array and OFDM numerology of a config.
 */
typedef struct HfceSystemInfo {
  size_t n_antennas;
  size_t n_rf_chains;
  size_t n_pilot_slots;
  size_t n_subcarriers;
  double carrier_freq_hz;
  double wavelength_m;
  double spacing_m;
  double rayleigh_distance_m;
} HfceSystemInfo;

typedef struct HfceComplex64 {
  double re;
  double im;
} HfceComplex64;

typedef struct HfceComplex32 {
  float re;
  float im;
} HfceComplex32;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on this thread.
 */
const char *hfce_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *hfce_version(void);

/*
 Desk-scale default config (64 antennas, 100 GHz).
 */
enum HfceStatus hfce_config_desk(struct HfceConfig **out);

/*
 Loads a TOML or JSON experiment config.
 */
enum HfceStatus hfce_config_load(const char *path, struct HfceConfig **out);

/*
 Overrides array size, RF chains and pilot slots; validated on the spot.
 */
enum HfceStatus hfce_config_set_array(struct HfceConfig *cfg,
                                      size_t n_antennas,
                                      size_t n_rf_chains,
                                      size_t n_pilot_slots);

enum HfceStatus hfce_config_set_seed(struct HfceConfig *cfg, uint64_t seed);

enum HfceStatus hfce_config_system(const struct HfceConfig *cfg, struct HfceSystemInfo *out);

void hfce_config_free(struct HfceConfig *cfg);

enum HfceStatus hfce_dictionary_build(const struct HfceConfig *cfg,
                                      enum HfceDictionaryKind kind,
                                      struct HfceDictionary **out);

enum HfceStatus hfce_dictionary_shape(const struct HfceDictionary *dict,
                                      size_t *rows,
                                      size_t *cols);

/*
 Copies the `N x S` matrix row-major into `buf` (`len` elements).
 */
enum HfceStatus hfce_dictionary_copy(const struct HfceDictionary *dict,
                                     struct HfceComplex64 *buf,
                                     size_t len);

void hfce_dictionary_free(struct HfceDictionary *dict);

/*
 Draws scene `trial` from the config seed and assembles its `N x M` channel.
 */
enum HfceStatus hfce_channel_generate(const struct HfceConfig *cfg,
                                      uint64_t trial,
                                      struct HfceChannel **out);

enum HfceStatus hfce_channel_shape(const struct HfceChannel *channel,
                                   size_t *rows,
                                   size_t *cols,
                                   size_t *n_paths);

enum HfceStatus hfce_channel_copy(const struct HfceChannel *channel,
                                  struct HfceComplex64 *buf,
                                  size_t len);

void hfce_channel_free(struct HfceChannel *channel);

/*
 Observes `channel` through a random combiner at `snr_db` and runs OMP.
 `sparsity = 0` uses the config's value, or the scene's path count.
 */
enum HfceStatus hfce_estimate(const struct HfceConfig *cfg,
                              const struct HfceDictionary *dict,
                              const struct HfceChannel *channel,
                              double snr_db,
                              uint64_t trial,
                              size_t sparsity,
                              struct HfceEstimate **out);

/*
 Writes up to `len` support indices (selection order) into `buf` and the
 support size into `count`. `buf` may be null to query the size.
 */
enum HfceStatus hfce_estimate_support(const struct HfceEstimate *est,
                                      size_t *buf,
                                      size_t len,
                                      size_t *count);

/*
 Copies the `N x M` antenna-domain estimate row-major.
 */
enum HfceStatus hfce_estimate_copy(const struct HfceEstimate *est,
                                   struct HfceComplex64 *buf,
                                   size_t len);

/*
 NMSE in dB of the estimate against `channel`.
 */
enum HfceStatus hfce_estimate_nmse_db(const struct HfceEstimate *est,
                                      const struct HfceChannel *channel,
                                      double *out);

void hfce_estimate_free(struct HfceEstimate *est);

/*
 `10 log10(||H - H_hat||^2 / ||H||^2)` for two row-major `rows x cols`
 matrices.
 */
enum HfceStatus hfce_nmse_db(const struct HfceComplex64 *h,
                             const struct HfceComplex64 *h_hat,
                             size_t rows,
                             size_t cols,
                             double *out);

/*
 Writes a row-major complex64 tensor as HFCT.
 */
enum HfceStatus hfce_tensor_write(const char *path,
                                  const size_t *dims,
                                  size_t ndim,
                                  const struct HfceComplex32 *data);

enum HfceStatus hfce_tensor_read(const char *path, struct HfceTensor **out);

size_t hfce_tensor_ndim(const struct HfceTensor *t);

/*
 Pointer to the `ndim` dimensions; valid while the tensor lives.
 */
const size_t *hfce_tensor_dims(const struct HfceTensor *t);

/*
 Pointer to the row-major elements; valid while the tensor lives.
 */
const struct HfceComplex32 *hfce_tensor_data(const struct HfceTensor *t);

void hfce_tensor_free(struct HfceTensor *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HFCE_H */
