#ifndef FIBSTAT_H
#define FIBSTAT_H

/*
 * C interface of libfibstat. Handles are opaque; every call that can fail
 * returns an fs_status and records a message retrievable with fs_last_error()
 * on the calling thread. Strings returned by a handle live as long as it.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define FS_API __declspec(dllexport)
#else
#  define FS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fs_status {
    FS_OK = 0,
    FS_ERR_ARGUMENT = 1, /* null handle, index out of range */
    FS_ERR_CONFIG = 2,   /* rejected configuration or input */
    FS_ERR_TAINT = 3,    /* tainted fraction above the ceiling */
    FS_ERR_INTERNAL = 4  /* invariant violation */
} fs_status;

typedef struct fs_config fs_config;
typedef struct fs_result fs_result;

FS_API const char* fs_version(void);

/* command: enumerate, sigma, ekac, tau, delta, hilbert or baseline */
FS_API fs_status fs_config_new(const char* command, fs_config** out);
FS_API void fs_config_free(fs_config* config);
/* Keys: family B S r_max depth threads seed output format samples exhaustive
 * centering window p_max source precision cutoff input symbol conic place N n
 * modulus list taint_ceiling. */
FS_API fs_status fs_config_set(fs_config* config, const char* key, const char* value);
FS_API fs_status fs_config_validate(const fs_config* config);
/* 16 hex digits plus the terminator; len >= 17 */
FS_API fs_status fs_config_hash(const fs_config* config, char* buf, size_t len);

/* Runs the command. When the config has an output prefix the files are
 * written too (all or none). */
FS_API fs_status fs_run(const fs_config* config, fs_result** out);
FS_API void fs_result_free(fs_result* result);

FS_API size_t fs_result_table_count(const fs_result* result);
FS_API const char* fs_result_table_name(const fs_result* result, size_t index);
FS_API const char* fs_result_table_csv(const fs_result* result, size_t index);
FS_API const char* fs_result_table_json(const fs_result* result, size_t index);
FS_API const char* fs_result_manifest(const fs_result* result);
FS_API size_t fs_result_value_count(const fs_result* result);
FS_API const char* fs_result_value_key(const fs_result* result, size_t index);
/* NULL when the run produced no such value */
FS_API const char* fs_result_value(const fs_result* result, const char* key);
FS_API double fs_result_tainted_fraction(const fs_result* result);
FS_API double fs_result_wall_seconds(const fs_result* result);
/* format: "csv" or "json"; files_written may be NULL */
FS_API fs_status fs_result_write(const fs_result* result, const char* prefix, const char* format,
                                 size_t* files_written);

/* (a,b)_v for nonzero integers; place is "inf" or a prime */
FS_API fs_status fs_hilbert_symbol(int64_t a, int64_t b, const char* place, int* out);

FS_API const char* fs_last_error(void);
/* {"error": {"kind", "code", "message"}} for the last failure on this thread */
FS_API const char* fs_last_error_json(void);

#ifdef __cplusplus
}
#endif

#endif
