def MARA_CONFIG_MODULES():
    from mara_hdc import config
    return [config]

def MARA_CLICK_COMMANDS():
    from mara_hdc.cli import cli
    return [cli]
