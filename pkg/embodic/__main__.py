if __name__ == "__main__":
    from embodic.app import main

    main()
