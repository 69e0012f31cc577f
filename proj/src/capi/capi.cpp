#include "minv/minv.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "config.hpp"
#include "dataset.hpp"
#include "invert.hpp"
#include "model.hpp"
#include "pipeline.hpp"

namespace {

thread_local std::string g_last_error;

int code_of(const minv::Error& e) {
    switch (e.code()) {
        case minv::Errc::invalid_argument: return MINV_EINVAL;
        case minv::Errc::shape_mismatch: return MINV_ESHAPE;
        case minv::Errc::numeric: return MINV_ENUMERIC;
        case minv::Errc::io: return MINV_EIO;
        case minv::Errc::format: return MINV_EFORMAT;
        case minv::Errc::version: return MINV_EVERSION;
        case minv::Errc::checksum: return MINV_ECHECKSUM;
        case minv::Errc::truncated: return MINV_ETRUNCATED;
        case minv::Errc::config: return MINV_ECONFIG;
    }
    return MINV_EUNKNOWN;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return MINV_OK;
    } catch (const minv::Error& e) {
        g_last_error = e.what();
        return code_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MINV_EUNKNOWN;
    } catch (...) {
        g_last_error = "unknown failure";
        return MINV_EUNKNOWN;
    }
}

char* dup_text(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

struct minv_config {
    minv::Config impl;
};

struct minv_dataset {
    minv::Dataset impl;
};

struct minv_model {
    minv::Model impl;
};

struct minv_result {
    minv::InversionResult impl;
};

extern "C" {

const char* minv_last_error(void) {
    return g_last_error.c_str();
}

minv_config* minv_config_new(void) {
    return new (std::nothrow) minv_config{};
}

void minv_config_free(minv_config* cfg) {
    delete cfg;
}

int minv_config_load_file(minv_config* cfg, const char* path) {
    if (!cfg || !path) {
        g_last_error = "null argument";
        return MINV_EINVAL;
    }
    return guarded([&] { cfg->impl.load_file(path); });
}

int minv_config_set(minv_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) {
        g_last_error = "null argument";
        return MINV_EINVAL;
    }
    return guarded([&] { cfg->impl.set(key, value); });
}

int minv_config_get(const minv_config* cfg, const char* key, char* buf, size_t cap) {
    if (!cfg || !key || !buf) {
        g_last_error = "null argument";
        return MINV_EINVAL;
    }
    return guarded([&] {
        std::string v = cfg->impl.get(key);
        minv::require(v.size() + 1 <= cap, minv::Errc::invalid_argument,
                      "buffer too small for value");
        std::memcpy(buf, v.c_str(), v.size() + 1);
    });
}

char* minv_config_defaults(void) {
    return dup_text(minv::Config::defaults_text());
}

char* minv_config_echo(const minv_config* cfg) {
    if (!cfg) return nullptr;
    return dup_text(cfg->impl.echo_text());
}

void minv_text_free(char* text) {
    std::free(text);
}

int minv_dataset_load_idx(const char* images_path, const char* labels_path, minv_dataset** out) {
    if (!images_path || !labels_path || !out) {
        g_last_error = "null argument";
        return MINV_EINVAL;
    }
    return guarded([&] {
        auto* d = new minv_dataset{minv::load_idx(images_path, labels_path)};
        *out = d;
    });
}

int minv_dataset_synth_glyphs(size_t classes, size_t per_class, size_t size, uint64_t seed,
                              minv_dataset** out) {
    if (!out) {
        g_last_error = "null argument";
        return MINV_EINVAL;
    }
    return guarded([&] {
        auto* d = new minv_dataset{minv::synth_glyphs(classes, per_class, size, seed)};
        *out = d;
    });
}

int minv_dataset_subset(const minv_dataset* d, const int32_t* keep, size_t keep_len, int relabel,
                        minv_dataset** out) {
    if (!d || !keep || !out) {
        g_last_error = "null argument";
        return MINV_EINVAL;
    }
    return guarded([&] {
        std::vector<int32_t> ks(keep, keep + keep_len);
        *out = new minv_dataset{minv::subset_classes(d->impl, ks, relabel != 0)};
    });
}

int minv_dataset_merge(const minv_dataset* a, const minv_dataset* b, minv_dataset** out) {
    if (!a || !b || !out) {
        g_last_error = "null argument";
        return MINV_EINVAL;
    }
    return guarded([&] { *out = new minv_dataset{minv::merge(a->impl, b->impl)}; });
}

size_t minv_dataset_size(const minv_dataset* d) {
    return d ? d->impl.size() : 0;
}

size_t minv_dataset_classes(const minv_dataset* d) {
    return d ? d->impl.class_count() : 0;
}

size_t minv_dataset_dim(const minv_dataset* d) {
    return d ? d->impl.dim() : 0;
}

void minv_dataset_free(minv_dataset* d) {
    delete d;
}

int minv_model_load(const char* path, minv_model** out) {
    if (!path || !out) {
        g_last_error = "null argument";
        return MINV_EINVAL;
    }
    return guarded([&] { *out = new minv_model{minv::load_model(path)}; });
}

int minv_model_save(const minv_model* m, const char* path) {
    if (!m || !path) {
        g_last_error = "null argument";
        return MINV_EINVAL;
    }
    return guarded([&] { minv::save_model(m->impl, path); });
}

size_t minv_model_input_size(const minv_model* m) {
    return m ? m->impl.spec.input_size() : 0;
}

size_t minv_model_output_size(const minv_model* m) {
    return m ? m->impl.spec.output_size() : 0;
}

int minv_model_infer(const minv_model* m, const double* batch, size_t n, size_t dim, double* out,
                     size_t out_cap) {
    if (!m || !batch || !out) {
        g_last_error = "null argument";
        return MINV_EINVAL;
    }
    return guarded([&] {
        minv::Tensor in({n, dim}, std::vector<double>(batch, batch + n * dim));
        minv::Tensor res = minv::infer(m->impl, in);
        minv::require(res.size() <= out_cap, minv::Errc::invalid_argument,
                      "output buffer too small");
        std::memcpy(out, res.data().data(), res.size() * sizeof(double));
    });
}

void minv_model_free(minv_model* m) {
    delete m;
}

int minv_invert(const minv_model* target, const minv_model* generator, const minv_config* cfg,
                int class_index, minv_result** out) {
    if (!target || !cfg || !out) {
        g_last_error = "null argument";
        return MINV_EINVAL;
    }
    return guarded([&] {
        minv::AttackConfig ac = minv::attack_config_from(cfg->impl);
        ac.target_class = class_index;
        ac.mode = generator ? minv::AttackMode::latent : minv::AttackMode::direct;
        minv::InversionResult res =
            generator ? minv::invert_latent(target->impl, generator->impl, ac)
                      : minv::invert_direct(target->impl, ac);
        *out = new minv_result{std::move(res)};
    });
}

double minv_result_confidence(const minv_result* r) {
    return r ? r->impl.confidence : 0.0;
}

double minv_result_loss(const minv_result* r) {
    return r ? r->impl.loss : 0.0;
}

size_t minv_result_dim(const minv_result* r) {
    return r ? r->impl.x.size() : 0;
}

int minv_result_image(const minv_result* r, double* buf, size_t cap) {
    if (!r || !buf) {
        g_last_error = "null argument";
        return MINV_EINVAL;
    }
    return guarded([&] {
        minv::require(r->impl.x.size() <= cap, minv::Errc::invalid_argument,
                      "buffer too small for image");
        std::memcpy(buf, r->impl.x.data().data(), r->impl.x.size() * sizeof(double));
    });
}

size_t minv_result_iterations(const minv_result* r) {
    return r ? r->impl.trace.size() : 0;
}

void minv_result_free(minv_result* r) {
    delete r;
}

#define MINV_RUN_IMPL(name, fn)                                      \
    int name(const minv_config* cfg, const char* outdir) {           \
        if (!cfg || !outdir) {                                       \
            g_last_error = "null argument";                          \
            return MINV_EINVAL;                                      \
        }                                                            \
        return guarded([&] { minv::fn(cfg->impl, outdir); });        \
    }

MINV_RUN_IMPL(minv_run_train_target, run_train_target)
MINV_RUN_IMPL(minv_run_train_gan, run_train_gan)
MINV_RUN_IMPL(minv_run_invert, run_invert)
MINV_RUN_IMPL(minv_run_sweep_p, run_sweep_p)
MINV_RUN_IMPL(minv_run_analyze_manifold, run_analyze_manifold)
MINV_RUN_IMPL(minv_run_interpolate, run_interpolate)
MINV_RUN_IMPL(minv_run_render, run_render)

#undef MINV_RUN_IMPL

int minv_run_reproduce(const minv_config* cfg, const char* experiment, const char* outdir) {
    if (!cfg || !experiment || !outdir) {
        g_last_error = "null argument";
        return MINV_EINVAL;
    }
    return guarded([&] { minv::run_reproduce(cfg->impl, experiment, outdir); });
}

} // extern "C"
