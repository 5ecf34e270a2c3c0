#ifndef NPC_RELIABILITY_H
#define NPC_RELIABILITY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Device positions of one leg, in the order S1–S4, D1–D6.
typedef enum NpcDeviceRole {
  NPC_DEVICE_ROLE_S1 = 0,
  NPC_DEVICE_ROLE_S2,
  NPC_DEVICE_ROLE_S3,
  NPC_DEVICE_ROLE_S4,
  NPC_DEVICE_ROLE_D1,
  NPC_DEVICE_ROLE_D2,
  NPC_DEVICE_ROLE_D3,
  NPC_DEVICE_ROLE_D4,
  NPC_DEVICE_ROLE_D5,
  NPC_DEVICE_ROLE_D6,
} NpcDeviceRole;

typedef enum NpcMode {
  // Configured per-strategy factor overrides replace computed factors.
  NPC_MODE_PAPER_FACTORS = 0,
  NPC_MODE_MODEL = 1,
} NpcMode;

typedef enum NpcPartType {
  NPC_PART_TYPE_MOSFET = 0,
  NPC_PART_TYPE_DIODE = 1,
  NPC_PART_TYPE_CAPACITOR = 2,
} NpcPartType;

// Result code of every fallible call.
typedef enum NpcStatus {
  NPC_STATUS_OK = 0,
  // Null pointer or invalid UTF-8. Enum arguments must hold a declared value.
  NPC_STATUS_INVALID_ARGUMENT = 1,
  NPC_STATUS_CONFIG_ERROR = 2,
  NPC_STATUS_NUMERIC_ERROR = 3,
  NPC_STATUS_IO_ERROR = 4,
  // A panic was caught; the handle arguments should be considered poisoned.
  NPC_STATUS_PANIC = 5,
} NpcStatus;

typedef enum NpcStrategy {
  NPC_STRATEGY_SPWM = 0,
  NPC_STRATEGY_THIPWM = 1,
  NPC_STRATEGY_SVPWM = 2,
} NpcStrategy;

// Opaque run configuration.
typedef struct NpcConfig NpcConfig;

// Opaque evaluation report.
typedef struct NpcReport NpcReport;

// Operating point in configuration units.
typedef struct NpcOperatingPoint {
  double modulation_index;
  double power_factor;
  double peak_current_a;
  double output_frequency_hz;
  double carrier_frequency_hz;
  double dc_link_voltage_v;
  double ambient_temperature_degc;
} NpcOperatingPoint;

// Loss, temperatures and failure rate (per 10^6 h) of one device.
typedef struct NpcDeviceResult {
  double p_cond_w;
  double p_sw_w;
  double total_w;
  double t_case_degc;
  double t_junction_degc;
  double lambda_per_1e6_h;
} NpcDeviceResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates the built-in default configuration.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum NpcStatus npc_config_default(struct NpcConfig **out);

// Parses a configuration from NUL-terminated TOML text.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be writable.
enum NpcStatus npc_config_from_toml(const char *toml, struct NpcConfig **out);

// Loads a configuration file; relative paths inside it resolve against its directory.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum NpcStatus npc_config_load(const char *path, struct NpcConfig **out);

// Releases a configuration. NULL is ignored.
//
// # Safety
// `cfg` must be NULL or a handle from this library not yet freed.
void npc_config_free(struct NpcConfig *cfg);

// Reads the configured operating point.
//
// # Safety
// `cfg` must be a live handle and `out` writable.
enum NpcStatus npc_config_get_operating_point(const struct NpcConfig *cfg,
                                              struct NpcOperatingPoint *out);

// Replaces the operating point. An invalid point leaves the configuration unchanged.
//
// # Safety
// `cfg` must be a live handle and `op` readable.
enum NpcStatus npc_config_set_operating_point(struct NpcConfig *cfg,
                                              const struct NpcOperatingPoint *op);

// Evaluates one strategy.
//
// # Safety
// `cfg` must be a live handle and `out` writable.
enum NpcStatus npc_evaluate(const struct NpcConfig *cfg,
                            enum NpcStrategy strategy_id,
                            enum NpcMode eval_mode,
                            struct NpcReport **out);

// Evaluates all three strategies with the MTTF comparison.
//
// # Safety
// `cfg` must be a live handle and `out` writable.
enum NpcStatus npc_compare(const struct NpcConfig *cfg,
                           enum NpcMode eval_mode,
                           struct NpcReport **out);

// Releases a report. NULL is ignored.
//
// # Safety
// `report` must be NULL or a handle from this library not yet freed.
void npc_report_free(struct NpcReport *report);

// Inverter failure rate of `strategy` in failures per 10^6 hours.
//
// # Safety
// `report` must be a live handle and `out` writable.
enum NpcStatus npc_report_lambda_total(const struct NpcReport *report,
                                       enum NpcStrategy strategy_id,
                                       double *out);

// Inverter MTTF of `strategy` in hours.
//
// # Safety
// `report` must be a live handle and `out` writable.
enum NpcStatus npc_report_mttf_hours(const struct NpcReport *report,
                                     enum NpcStrategy strategy_id,
                                     double *out);

// Results for one device of leg A.
//
// # Safety
// `report` must be a live handle and `out` writable.
enum NpcStatus npc_report_device(const struct NpcReport *report,
                                 enum NpcStrategy strategy_id,
                                 enum NpcDeviceRole role,
                                 struct NpcDeviceResult *out);

// Serialises the report as JSON. Free the string with [`npc_string_free`].
//
// # Safety
// `report` must be a live handle and `out` writable.
enum NpcStatus npc_report_to_json(const struct NpcReport *report, char **out);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must be NULL or a string from this library not yet freed.
void npc_string_free(char *s);

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next call into the library from the same thread.
const char *npc_last_error_message(void);

// Temperature factor of a part at `temperature_degc`.
//
// # Safety
// `out` must be writable.
enum NpcStatus npc_pi_t(enum NpcPartType part, double temperature_degc, double *out);

// MTTF in hours of a series system with failure rate `lambda_per_1e6_h`.
//
// # Safety
// `out` must be writable.
enum NpcStatus npc_mttf_hours(double lambda_per_1e6_h, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NPC_RELIABILITY_H */
