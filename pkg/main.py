from extrapolab.command_line import cli


def main():
    cli(prog_name='extrapolab')


if __name__ == "__main__":
    main()
