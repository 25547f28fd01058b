#ifndef SPECSHARP_SPECSHARP_H
#define SPECSHARP_SPECSHARP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SS_API __declspec(dllexport)
#else
#define SS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ss_status {
    SS_OK = 0,
    SS_ERR_ARGUMENT = 1, /* null pointer, bad size, violated precondition */
    SS_ERR_DECODE = 2,   /* bytes are not a supported PNG */
    SS_ERR_IO = 3,       /* file could not be read or written */
    SS_ERR_CACHE = 4,    /* weight cache missing, corrupt or incompatible */
    SS_ERR_INTERNAL = 5
} ss_status;

/// Message of the last failure on the calling thread; empty after success.
SS_API const char* ss_last_error(void);
SS_API const char* ss_version(void);

/* Images hold linear-light samples in [0, 1]; 1 (gray) or 3 (RGB) channels. */
typedef struct ss_image ss_image;

SS_API ss_status ss_image_decode_png(const uint8_t* bytes, size_t size, ss_image** out);
SS_API ss_status ss_image_read_png(const char* path, ss_image** out);
/// Interleaved 8-bit sRGB pixels, row-major.
SS_API ss_status ss_image_from_srgb8(int width, int height, int channels, const uint8_t* pixels,
                                     ss_image** out);
/// Unit-power white noise, single channel.
SS_API ss_status ss_image_white_noise(int width, int height, uint64_t seed, ss_image** out);
SS_API ss_status ss_image_encode_png(const ss_image* image, uint8_t** bytes, size_t* size);
SS_API ss_status ss_image_write_png(const ss_image* image, const char* path);
/// Writes width*height*channels bytes to `pixels`.
SS_API ss_status ss_image_to_srgb8(const ss_image* image, uint8_t* pixels, size_t capacity);
SS_API int ss_image_width(const ss_image* image);
SS_API int ss_image_height(const ss_image* image);
SS_API int ss_image_channels(const ss_image* image);
SS_API void ss_image_free(ss_image* image);

SS_API void ss_buffer_free(uint8_t* bytes);

/// Level count chosen for an image of this size.
SS_API ss_status ss_default_levels(int width, int height, int* levels);

/* Blur surrogate: piecewise-linear log10 slope over viewing distance. */
typedef struct ss_model ss_model;

SS_API ss_status ss_model_reference(ss_model** out);
SS_API ss_status ss_model_load(const char* path, ss_model** out);
SS_API ss_status ss_model_transfer_at(const ss_model* model, double distance_cm, double nu,
                                      double* value);
SS_API ss_status ss_model_slope_at(const ss_model* model, double distance_cm, double* slope);
SS_API const char* ss_model_hash(const ss_model* model);
SS_API void ss_model_free(ss_model* model);

typedef struct ss_calibration_options {
    int levels;
    int noise_size;
    uint64_t first_seed;
    int seed_count;
    double band_lo;
    double band_hi;
    int max_iterations; /* per distance; entries that hit it are flagged */
} ss_calibration_options;

SS_API void ss_calibration_options_default(ss_calibration_options* options);

/* Precomputed band weights over a grid of viewing distances. */
typedef struct ss_cache ss_cache;

SS_API ss_status ss_cache_calibrate(const ss_model* model, const double* distances, size_t count,
                                    const ss_calibration_options* options, ss_cache** out);
SS_API ss_status ss_cache_load(const char* path, ss_cache** out);
SS_API ss_status ss_cache_save(const ss_cache* cache, const char* path);
SS_API int ss_cache_levels(const ss_cache* cache);
SS_API size_t ss_cache_entry_count(const ss_cache* cache);
SS_API int ss_cache_all_converged(const ss_cache* cache);
SS_API ss_status ss_cache_entry(const ss_cache* cache, size_t index, double* distance_cm,
                                double* objective, int* converged);
/// Writes levels-1 weights, finest band first.
SS_API ss_status ss_cache_weights_for(const ss_cache* cache, double distance_cm, double* weights,
                                      size_t capacity);
SS_API void ss_cache_free(ss_cache* cache);

SS_API ss_status ss_sharpen(const ss_image* image, double distance_cm, const ss_cache* cache,
                            ss_image** out, double* clipped_fraction);
SS_API ss_status ss_simulate_view(const ss_image* image, double distance_cm, const ss_model* model,
                                  ss_image** out);

/* Radial spectra: bin centers, values and validity flags share one length. */
typedef struct ss_spectrum_view {
    size_t count;
    const double* nu;
    const double* values;
    const uint8_t* valid;
} ss_spectrum_view;

typedef enum ss_spectrum_kind {
    SS_SPECTRUM_ORIGINAL = 0,
    SS_SPECTRUM_SIMULATED = 1,
    SS_SPECTRUM_LOG_RELATIVE = 2
} ss_spectrum_kind;

typedef struct ss_analysis ss_analysis;

SS_API ss_status ss_analyze_image(const ss_model* model, const ss_image* image,
                                  const double* distances, size_t count, ss_analysis** out);
SS_API ss_status ss_analyze_noise(const ss_model* model, int size, uint64_t first_seed,
                                  int seed_count, const double* distances, size_t count,
                                  ss_analysis** out);
SS_API size_t ss_analysis_distance_count(const ss_analysis* analysis);
/// The original spectrum ignores `index`.
SS_API ss_status ss_analysis_spectrum(const ss_analysis* analysis, ss_spectrum_kind kind,
                                      size_t index, ss_spectrum_view* view);
/// `available` is 0 when too few valid bins remain for a fit.
SS_API ss_status ss_analysis_slope(const ss_analysis* analysis, size_t index, double* distance_cm,
                                   double* slope, int* available);
/// CSV with header `nu,power` or `nu,log_rel`.
SS_API ss_status ss_analysis_write_csv(const ss_analysis* analysis, ss_spectrum_kind kind,
                                       size_t index, const char* path);
SS_API void ss_analysis_free(ss_analysis* analysis);

/* An uploaded image decomposed once and rendered at many distances. Safe to
   share read-only between threads. */
typedef struct ss_session ss_session;

/// `levels` 0 picks the default for the image size.
SS_API ss_status ss_session_create(const ss_image* image, int levels, ss_session** out);
SS_API int ss_session_levels(const ss_session* session);
SS_API int ss_session_width(const ss_session* session);
SS_API int ss_session_height(const ss_session* session);
SS_API ss_status ss_session_render(const ss_session* session, const ss_cache* cache,
                                   double distance_cm, ss_image** out, double* clipped_fraction);

typedef enum ss_session_spectrum {
    SS_SESSION_ORIGINAL = 0,
    SS_SESSION_SHARPENED = 1,
    SS_SESSION_SIMULATED = 2 /* sharpened, then seen at the distance */
} ss_session_spectrum;

typedef struct ss_spectra ss_spectra;

SS_API ss_status ss_session_spectra(const ss_session* session, const ss_cache* cache,
                                    const ss_model* model, double distance_cm, ss_spectra** out);
SS_API ss_status ss_spectra_get(const ss_spectra* spectra, ss_session_spectrum which,
                                ss_spectrum_view* view);
SS_API void ss_spectra_free(ss_spectra* spectra);
SS_API void ss_session_free(ss_session* session);

#ifdef __cplusplus
}
#endif

#endif
