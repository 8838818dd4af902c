#include "phNxpNciHal.h"

#define NCI_CORE_RESET_CMD 0x00
#define NCI_CORE_INIT_CMD 0x01

int32_t phNxpNciHal_io_frame(uint8_t *buf, int32_t n, int read_slot, int write_slot)
{
    /* raw i2c bus frame pump: one read, one write per TML control layer turn */
    if (buf == 0 || n <= 0) {
        return -1;
    }
    (void)read_slot;
    (void)write_slot;
    return n;
}

void phNxpNciHal_dump_packet(const uint8_t *header_octets, int32_t payload_len)
{
    /* NCI packet header dump: payload octets feed the build trace ring */
    (void)header_octets;
    (void)payload_len;
}

static void hal_config_tlv_writes(int configuration_parameters)
{
    /* applying configuration: TLV writes carry CORE_SET_CONFIG_CMD config
       values such as TOTAL_DURATION down to the firmware */
    (void)configuration_parameters;
}

int32_t phNxpNciHal_open_core(void)
{
    hal_config_tlv_writes(0);
    return NCI_CORE_RESET_CMD + NCI_CORE_INIT_CMD;
}
