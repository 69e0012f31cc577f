/* minv — model inversion toolkit C API.
 *
 * All functions return MINV_OK (0) or a negative-free positive status code;
 * minv_last_error() describes the most recent failure on the calling thread.
 * Objects are opaque handles released with the matching _free function.
 */
#ifndef MINV_H
#define MINV_H

#include <stddef.h>
#include <stdint.h>

#if defined(__cplusplus)
extern "C" {
#endif

enum {
    MINV_OK = 0,
    MINV_EINVAL = 1,     /* contract violation / bad argument */
    MINV_ESHAPE = 2,     /* tensor or model shape mismatch */
    MINV_ENUMERIC = 3,   /* non-finite value, failed solve */
    MINV_EIO = 4,        /* file system failure */
    MINV_EFORMAT = 5,    /* malformed file (magic/header) */
    MINV_EVERSION = 6,   /* unsupported format version */
    MINV_ECHECKSUM = 7,  /* parameter checksum mismatch */
    MINV_ETRUNCATED = 8, /* file shorter than declared */
    MINV_ECONFIG = 9,    /* unknown key / unparsable configuration */
    MINV_EUNKNOWN = 127
};

/* message for the last failing call on this thread; never NULL */
const char* minv_last_error(void);

/* ---- configuration ---- */

typedef struct minv_config minv_config;

minv_config* minv_config_new(void); /* schema defaults */
void minv_config_free(minv_config* cfg);
int minv_config_load_file(minv_config* cfg, const char* path);
int minv_config_set(minv_config* cfg, const char* dotted_key, const char* value);
/* copies the value into buf (NUL-terminated); fails with MINV_EINVAL if the
 * buffer is too small */
int minv_config_get(const minv_config* cfg, const char* dotted_key, char* buf, size_t cap);
/* returns a malloc'd schema listing with defaults; free with minv_text_free */
char* minv_config_defaults(void);
char* minv_config_echo(const minv_config* cfg);
void minv_text_free(char* text);

/* ---- datasets ---- */

typedef struct minv_dataset minv_dataset;

int minv_dataset_load_idx(const char* images_path, const char* labels_path, minv_dataset** out);
int minv_dataset_synth_glyphs(size_t classes, size_t per_class, size_t size, uint64_t seed,
                              minv_dataset** out);
int minv_dataset_subset(const minv_dataset* d, const int32_t* keep, size_t keep_len, int relabel,
                        minv_dataset** out);
int minv_dataset_merge(const minv_dataset* a, const minv_dataset* b, minv_dataset** out);
size_t minv_dataset_size(const minv_dataset* d);
size_t minv_dataset_classes(const minv_dataset* d);
size_t minv_dataset_dim(const minv_dataset* d);
void minv_dataset_free(minv_dataset* d);

/* ---- models ---- */

typedef struct minv_model minv_model;

int minv_model_load(const char* path, minv_model** out);
int minv_model_save(const minv_model* m, const char* path);
size_t minv_model_input_size(const minv_model* m);
size_t minv_model_output_size(const minv_model* m);
/* row-major batch [n x dim] in, [n x output] out; out_cap in doubles */
int minv_model_infer(const minv_model* m, const double* batch, size_t n, size_t dim, double* out,
                     size_t out_cap);
void minv_model_free(minv_model* m);

/* ---- attacks ---- */

typedef struct minv_result minv_result;

/* generator may be NULL for a direct (input-space) attack; attack settings
 * come from the [attack] section of cfg, the target class from class_index */
int minv_invert(const minv_model* target, const minv_model* generator, const minv_config* cfg,
                int class_index, minv_result** out);
double minv_result_confidence(const minv_result* r);
double minv_result_loss(const minv_result* r);
size_t minv_result_dim(const minv_result* r);
int minv_result_image(const minv_result* r, double* buf, size_t cap);
size_t minv_result_iterations(const minv_result* r);
void minv_result_free(minv_result* r);

/* ---- pipeline runs (the CLI surface) ---- */

int minv_run_train_target(const minv_config* cfg, const char* outdir);
int minv_run_train_gan(const minv_config* cfg, const char* outdir);
int minv_run_invert(const minv_config* cfg, const char* outdir);
int minv_run_sweep_p(const minv_config* cfg, const char* outdir);
int minv_run_analyze_manifold(const minv_config* cfg, const char* outdir);
int minv_run_interpolate(const minv_config* cfg, const char* outdir);
int minv_run_render(const minv_config* cfg, const char* outdir);
/* experiment: "synthetic", "mnist-6of10" or "fashion-5of10" */
int minv_run_reproduce(const minv_config* cfg, const char* experiment, const char* outdir);

#if defined(__cplusplus)
}
#endif

#endif /* MINV_H */
